#include "udd/dca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "udd/rng.hpp"

namespace udd {

namespace detail {

std::vector<double> project_to_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double theta = 0.0;
    int rho = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cum += u[k];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) {
            rho = static_cast<int>(k + 1);
            theta = t;
        }
    }
    for (double& x : v) x = std::max(0.0, x - theta);
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= sum;
    return v;
}

namespace {

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_linear(std::vector<double> a, std::vector<double> rhs, int n,
                  std::vector<double>& out) {
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::abs(a[static_cast<std::size_t>(r) * n + c]) >
                std::abs(a[static_cast<std::size_t>(pivot) * n + c])) {
                pivot = r;
            }
        }
        if (std::abs(a[static_cast<std::size_t>(pivot) * n + c]) < 1e-300) return false;
        if (pivot != c) {
            for (int k = 0; k < n; ++k) {
                std::swap(a[static_cast<std::size_t>(pivot) * n + k],
                          a[static_cast<std::size_t>(c) * n + k]);
            }
            std::swap(rhs[static_cast<std::size_t>(pivot)], rhs[static_cast<std::size_t>(c)]);
        }
        const double pv = a[static_cast<std::size_t>(c) * n + c];
        for (int r = c + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + c] / pv;
            if (f == 0.0) continue;
            for (int k = c; k < n; ++k) {
                a[static_cast<std::size_t>(r) * n + k] -= f * a[static_cast<std::size_t>(c) * n + k];
            }
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(c)];
        }
    }
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k) {
            s -= a[static_cast<std::size_t>(r) * n + k] * out[static_cast<std::size_t>(k)];
        }
        out[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

double quad_objective(const std::vector<double>& gram, const std::vector<double>& linear,
                      const std::vector<double>& v) {
    const int n = static_cast<int>(linear.size());
    double obj = 0.0;
    for (int a = 0; a < n; ++a) {
        double gv = 0.0;
        for (int b = 0; b < n; ++b) {
            gv += gram[static_cast<std::size_t>(a) * n + b] * v[static_cast<std::size_t>(b)];
        }
        obj += 0.5 * v[static_cast<std::size_t>(a)] * gv -
               linear[static_cast<std::size_t>(a)] * v[static_cast<std::size_t>(a)];
    }
    return obj;
}

}  // namespace

std::vector<double> simplex_qp_min(const std::vector<double>& gram,
                                   const std::vector<double>& linear,
                                   const std::vector<double>& current) {
    const int n = static_cast<int>(linear.size());
    std::vector<double> best = current;
    double best_obj = quad_objective(gram, linear, current);

    std::vector<double> kkt;
    std::vector<double> rhs;
    std::vector<double> sol;
    std::vector<int> support;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        support.clear();
        for (int i = 0; i < n; ++i) {
            if (mask >> i & 1u) support.push_back(i);
        }
        const int k = static_cast<int>(support.size());
        // KKT system of the equality-constrained restriction to the support.
        kkt.assign(static_cast<std::size_t>(k + 1) * (k + 1), 0.0);
        rhs.assign(static_cast<std::size_t>(k + 1), 0.0);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                kkt[static_cast<std::size_t>(a) * (k + 1) + b] =
                    gram[static_cast<std::size_t>(support[static_cast<std::size_t>(a)]) * n +
                         support[static_cast<std::size_t>(b)]];
            }
            kkt[static_cast<std::size_t>(a) * (k + 1) + k] = 1.0;
            kkt[static_cast<std::size_t>(k) * (k + 1) + a] = 1.0;
            rhs[static_cast<std::size_t>(a)] = linear[static_cast<std::size_t>(support[static_cast<std::size_t>(a)])];
        }
        rhs[static_cast<std::size_t>(k)] = 1.0;
        if (!solve_linear(kkt, rhs, k + 1, sol)) continue;

        bool feasible = true;
        for (int a = 0; a < k; ++a) {
            if (sol[static_cast<std::size_t>(a)] < -1e-12) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;
        std::vector<double> v(static_cast<std::size_t>(n), 0.0);
        double sum = 0.0;
        for (int a = 0; a < k; ++a) {
            const double xv = std::max(0.0, sol[static_cast<std::size_t>(a)]);
            v[static_cast<std::size_t>(support[static_cast<std::size_t>(a)])] = xv;
            sum += xv;
        }
        for (double& x : v) x /= sum;
        const double obj = quad_objective(gram, linear, v);
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(v);
        }
    }
    return best;
}

}  // namespace detail

namespace {

struct Candidate {
    std::vector<double> source;                 // length L
    std::vector<std::vector<double>> channels;  // K matrices, row-major L x L
    double residual_l1 = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<double> history;
};

// digits[cell * K + j] = j-th coordinate of the cell's tuple
std::vector<int> cell_digits(int L, int K, std::size_t cells) {
    std::vector<int> digits(cells * static_cast<std::size_t>(K));
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t idx = c;
        for (int j = K - 1; j >= 0; --j) {
            digits[c * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)] =
                static_cast<int>(idx % static_cast<std::size_t>(L));
            idx /= static_cast<std::size_t>(L);
        }
    }
    return digits;
}

std::vector<double> dirichlet_draw(RngStream& rng, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& x : v) {
        x = -std::log(1.0 - rng.next_unit());
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace

JointDistribution theta_forward(const DependentComponentSystem& sys) {
    return product_output(sys);
}

DependentComponentSystem canonical_orientation(const DependentComponentSystem& sys) {
    auto nonincreasing = [](const Distribution& p) {
        for (int x = 0; x + 1 < p.size(); ++x) {
            if (p[x] < p[x + 1]) return false;
        }
        return true;
    };
    for (const Permutation& tau : all_permutations(sys.alphabet_size())) {
        DependentComponentSystem flipped = flip_system(sys, tau);
        if (nonincreasing(flipped.source)) return flipped;
    }
    throw Error("canonical_orientation: unreachable");
}

DcaFit dca_fit(const JointDistribution& q, const DcaConfig& config) {
    const int L = q.alphabet_size();
    const int K = q.copies();
    const std::size_t cells = q.cells();
    if (config.restarts < 1) throw InputError("dca_fit: needs at least one restart");
    const std::vector<int> digits = cell_digits(L, K, cells);

    const CounterRng base(config.seed);
    Candidate best;
    int best_index = -1;

    std::vector<double> model(cells);
    std::vector<double> col(cells);       // A[., x] for the current x
    std::vector<double> a_matrix(cells * static_cast<std::size_t>(L));
    std::vector<double> g(cells);
    std::vector<double> rest(cells);

    for (int restart = 0; restart < config.restarts; ++restart) {
        RngStream rng(base, static_cast<std::uint64_t>(restart));
        Candidate cand;
        cand.source = dirichlet_draw(rng, L);
        cand.channels.assign(static_cast<std::size_t>(K), {});
        for (auto& ch : cand.channels) {
            ch.resize(static_cast<std::size_t>(L) * L);
            for (int x = 0; x < L; ++x) {
                const std::vector<double> row = dirichlet_draw(rng, L);
                std::copy(row.begin(), row.end(), ch.begin() + static_cast<std::size_t>(x) * L);
            }
        }

        auto fill_a_column = [&](int x, std::vector<double>& out) {
            for (std::size_t c = 0; c < cells; ++c) {
                double t = 1.0;
                for (int j = 0; j < K; ++j) {
                    const int y = digits[c * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)];
                    t *= cand.channels[static_cast<std::size_t>(j)]
                                      [static_cast<std::size_t>(x) * L + y];
                }
                out[c] = t;
            }
        };
        auto refresh_model = [&]() {
            std::fill(model.begin(), model.end(), 0.0);
            for (int x = 0; x < L; ++x) {
                fill_a_column(x, col);
                std::copy(col.begin(), col.end(), a_matrix.begin() + static_cast<std::size_t>(x) * cells);
                for (std::size_t c = 0; c < cells; ++c) {
                    model[c] += cand.source[static_cast<std::size_t>(x)] * col[c];
                }
            }
        };
        auto objective = [&]() {
            double s = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                const double r = model[c] - q[c];
                s += r * r;
            }
            return s;
        };

        refresh_model();
        double prev = std::numeric_limits<double>::infinity();
        for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
            // Source block: Gram and linear term of ||A r - q||^2.
            std::vector<double> gram(static_cast<std::size_t>(L) * L, 0.0);
            std::vector<double> lin(static_cast<std::size_t>(L), 0.0);
            for (int a = 0; a < L; ++a) {
                const double* ca = a_matrix.data() + static_cast<std::size_t>(a) * cells;
                for (int b = a; b < L; ++b) {
                    const double* cb = a_matrix.data() + static_cast<std::size_t>(b) * cells;
                    double s = 0.0;
                    for (std::size_t c = 0; c < cells; ++c) s += ca[c] * cb[c];
                    gram[static_cast<std::size_t>(a) * L + b] = s;
                    gram[static_cast<std::size_t>(b) * L + a] = s;
                }
                double s = 0.0;
                for (std::size_t c = 0; c < cells; ++c) s += ca[c] * q[c];
                lin[static_cast<std::size_t>(a)] = s;
            }
            cand.source = detail::simplex_qp_min(gram, lin, cand.source);
            std::fill(model.begin(), model.end(), 0.0);
            for (int x = 0; x < L; ++x) {
                const double* cx = a_matrix.data() + static_cast<std::size_t>(x) * cells;
                for (std::size_t c = 0; c < cells; ++c) {
                    model[c] += cand.source[static_cast<std::size_t>(x)] * cx[c];
                }
            }

            // Channel rows: the Gram of a row subproblem is diagonal.
            for (int j = 0; j < K; ++j) {
                for (int x = 0; x < L; ++x) {
                    const double rx = cand.source[static_cast<std::size_t>(x)];
                    const double* ax = a_matrix.data() + static_cast<std::size_t>(x) * cells;
                    std::vector<double>& ch = cand.channels[static_cast<std::size_t>(j)];
                    // g holds the channel product with copy j left out.
                    for (std::size_t c = 0; c < cells; ++c) {
                        const int y = digits[c * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)];
                        const double vxy = ch[static_cast<std::size_t>(x) * L + y];
                        if (vxy != 0.0) {
                            g[c] = ax[c] / vxy;
                        } else {
                            double prod = 1.0;
                            for (int jj = 0; jj < K; ++jj) {
                                if (jj == j) continue;
                                const int yy = digits[c * static_cast<std::size_t>(K) +
                                                      static_cast<std::size_t>(jj)];
                                prod *= cand.channels[static_cast<std::size_t>(jj)]
                                                     [static_cast<std::size_t>(x) * L + yy];
                            }
                            g[c] = prod;
                        }
                        rest[c] = model[c] - rx * ax[c];
                    }
                    std::vector<double> gram_row(static_cast<std::size_t>(L) * L, 0.0);
                    std::vector<double> lin_row(static_cast<std::size_t>(L), 0.0);
                    for (std::size_t c = 0; c < cells; ++c) {
                        const int y = digits[c * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)];
                        const double gc = rx * g[c];
                        gram_row[static_cast<std::size_t>(y) * L + y] += gc * gc;
                        lin_row[static_cast<std::size_t>(y)] += gc * (q[c] - rest[c]);
                    }
                    std::vector<double> cur(ch.begin() + static_cast<std::size_t>(x) * L,
                                            ch.begin() + static_cast<std::size_t>(x + 1) * L);
                    const std::vector<double> row = detail::simplex_qp_min(gram_row, lin_row, cur);
                    std::copy(row.begin(), row.end(), ch.begin() + static_cast<std::size_t>(x) * L);
                    // refresh A[., x] and the model on the touched column
                    for (std::size_t c = 0; c < cells; ++c) {
                        const int y = digits[c * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)];
                        const double ax_new = g[c] * row[static_cast<std::size_t>(y)];
                        a_matrix[static_cast<std::size_t>(x) * cells + c] = ax_new;
                        model[c] = rest[c] + rx * ax_new;
                    }
                }
            }

            // Rebuild from scratch before measuring, so incremental drift
            // cannot leak into the convergence test or the history.
            refresh_model();
            const double obj = objective();
            cand.history.push_back(obj);
            if (prev - obj < config.tolerance) {
                cand.converged = true;
                break;
            }
            prev = obj;
        }

        double res = 0.0;
        for (std::size_t c = 0; c < cells; ++c) res += std::abs(model[c] - q[c]);
        cand.residual_l1 = res;
        if (best_index < 0 || cand.residual_l1 < best.residual_l1) {
            best = std::move(cand);
            best_index = restart;
        }
    }

    // Assemble, orient, and report.
    std::vector<Channel> channels;
    channels.reserve(static_cast<std::size_t>(K));
    for (const auto& ch : best.channels) channels.emplace_back(L, L, ch);
    DependentComponentSystem fitted(Distribution(best.source), std::move(channels));
    DcaFit fit{canonical_orientation(fitted)};
    const JointDistribution reproduced = theta_forward(fit.system);
    double l1 = 0.0;
    double l2 = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
        const double r = reproduced[c] - q[c];
        l1 += std::abs(r);
        l2 += r * r;
    }
    fit.residual_l1 = l1;
    fit.residual_l2 = std::sqrt(l2);
    fit.restarts_used = config.restarts;
    fit.converged = best.converged;
    fit.objective_history = std::move(best.history);
    fit.identifiability_warning = K < 3;
    for (const Channel& ch : fit.system.channels) {
        if (std::abs(ch.determinant()) < config.identifiability_det_threshold) {
            fit.identifiability_warning = true;
        }
    }
    double min_mass = 1.0;
    for (int x = 0; x < L; ++x) min_mass = std::min(min_mass, fit.system.source[x]);
    fit.low_source_mass_warning = min_mass < 1e-3;
    return fit;
}

}  // namespace udd
