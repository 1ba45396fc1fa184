#include "udd/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "udd/budda.hpp"
#include "udd/dca.hpp"
#include "udd/io.hpp"
#include "udd/mca.hpp"
#include "udd/model.hpp"
#include "udd/rng.hpp"
#include "udd/sim.hpp"

namespace udd {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<double> parse_prob_list(const std::string& text) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!tok.empty()) {
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                throw InputError("--p: malformed probability list '" + text + "'");
            }
            v.push_back(x);
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (v.size() == 1 && v[0] >= 0.0 && v[0] <= 1.0) v.push_back(1.0 - v[0]);
    return v;
}

std::vector<Channel> load_channels(const fs::path& path) {
    if (path.extension() == ".csv") {
        std::vector<Channel> out;
        for (BscParam b : read_bsc_csv(path)) out.push_back(Channel::from_bsc(b));
        return out;
    }
    return read_channels_json(path);
}

std::optional<std::vector<double>> bsc_values(const std::vector<Channel>& channels) {
    std::vector<double> b;
    for (const Channel& ch : channels) {
        if (!ch.is_square() || ch.input_size() != 2) return std::nullopt;
        if (std::abs(ch(0, 0) - ch(1, 1)) > 1e-12) return std::nullopt;
        b.push_back(ch(0, 0));
    }
    return b;
}

DistortionMeasure load_distortion(const std::string& spec, int alphabet_size) {
    if (spec == "hamming") return DistortionMeasure::hamming(alphabet_size);
    DistortionMeasure d = read_distortion_json(spec);
    if (d.size() != alphabet_size) {
        throw InputError("distortion matrix size does not match the alphabet");
    }
    return d;
}

std::string branch_name(BuddaBranch branch) {
    return branch == BuddaBranch::Direct ? "direct" : "conditional";
}

struct SimulateOptions {
    std::string out_dir;
    std::string image;
    std::string p_list;
    std::uint64_t n = 0;
    int width = 0;
    int height = 0;
    std::string channels_file;
    int random_bsc = 0;
    std::uint64_t seed = 0;
    std::string mode = "exact";
    bool no_truth = false;
};

int cmd_simulate(const SimulateOptions& opt) {
    if (opt.image.empty() == opt.p_list.empty()) {
        throw InputError("simulate: give exactly one of --image or --p");
    }
    if (opt.channels_file.empty() == (opt.random_bsc == 0)) {
        throw InputError("simulate: give exactly one of --channels or --random-bsc");
    }

    std::vector<std::uint8_t> source;
    int width = 0;
    int height = 0;
    if (!opt.image.empty()) {
        BinaryImage img = read_pbm(opt.image);
        width = img.width;
        height = img.height;
        source = std::move(img.pixels);
    } else {
        if (opt.n == 0) throw InputError("simulate: --p needs --n");
        const std::vector<double> p = parse_prob_list(opt.p_list);
        if (p.size() != 2) throw InputError("simulate: --p must describe a binary type");
        const SourceMode mode = opt.mode == "iid" ? SourceMode::Iid : SourceMode::ExactType;
        source = synthesize_source(Distribution(p), opt.n, opt.seed, mode);
        width = opt.width > 0 ? opt.width : static_cast<int>(opt.n);
        height = opt.height > 0 ? opt.height : 1;
        if (static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height) != opt.n) {
            throw InputError("simulate: --width * --height must equal --n");
        }
    }

    std::vector<Channel> channels;
    if (!opt.channels_file.empty()) {
        channels = load_channels(opt.channels_file);
    } else {
        const CounterRng rng(opt.seed);
        for (int j = 0; j < opt.random_bsc; ++j) {
            channels.push_back(Channel::from_bsc(BscParam(rng.unit(0xb5cULL, static_cast<std::uint64_t>(j)))));
        }
    }
    for (const Channel& ch : channels) {
        if (ch.input_size() != 2 || ch.output_size() != 2) {
            throw InputError("simulate: image pipeline needs binary channels");
        }
    }

    const ObservationMatrix obs = corrupt(source, channels, opt.seed);

    fs::create_directories(opt.out_dir);
    ObservationManifest manifest;
    manifest.n = source.size();
    manifest.copies = obs.copies();
    manifest.width = width;
    manifest.height = height;
    manifest.seed = opt.seed;
    manifest.rng = kRngName;
    manifest.mode = opt.image.empty() ? opt.mode : "image";
    manifest.source_type = type_of(source, 2).probs();
    manifest.bsc = bsc_values(channels);
    for (int j = 0; j < obs.copies(); ++j) {
        char name[32];
        std::snprintf(name, sizeof name, "copy_%02d.pbm", j + 1);
        BinaryImage img;
        img.width = width;
        img.height = height;
        img.pixels.resize(source.size());
        for (std::size_t i = 0; i < source.size(); ++i) img.pixels[i] = obs.at(i, j);
        write_pbm(fs::path(opt.out_dir) / name, img);
        manifest.copy_files.emplace_back(name);
    }
    if (!opt.no_truth) {
        BinaryImage img;
        img.width = width;
        img.height = height;
        img.pixels = source;
        write_pbm(fs::path(opt.out_dir) / "truth.pbm", img);
        manifest.truth_file = "truth.pbm";
    }
    write_manifest(fs::path(opt.out_dir) / "manifest.json", manifest);
    std::cout << opt.out_dir << ": " << obs.copies() << " corrupted copies of " << source.size()
              << " pixels\n";
    return 0;
}

struct EstimatorOptions {
    std::string method = "budda";
    double epsilon = 1e-6;
    bool optimized = false;
    int restarts = 16;
    int max_sweeps = 500;
    double tolerance = 1e-12;
    std::uint64_t dca_seed = 0;
};

struct EstimationOutcome {
    DependentComponentSystem system;
    Report report;
};

EstimationOutcome run_estimator(const ObservationMatrix& obs, const EstimatorOptions& opt) {
    const auto start = Clock::now();
    if (opt.method == "budda") {
        BuddaConfig config;
        config.epsilon = opt.epsilon;
        config.optimized_estimator = opt.optimized;
        const BuddaEstimate est = budda_estimate(obs, config);
        std::vector<Channel> channels;
        std::vector<double> b_values;
        for (BscParam b : est.b_hat) {
            channels.push_back(Channel::from_bsc(b));
            b_values.push_back(b.b());
        }
        Report report;
        report.algorithm = "budda";
        report.n = obs.rows();
        report.copies = obs.copies();
        report.p_hat = est.p_hat.probs();
        report.b_hat = std::move(b_values);
        report.branch = branch_name(est.branch);
        report.runtime_ms = ms_since(start);
        return EstimationOutcome{DependentComponentSystem(est.p_hat, std::move(channels)),
                                 std::move(report)};
    }
    if (opt.method != "dca") throw InputError("unknown estimation method '" + opt.method + "'");
    DcaConfig config;
    config.restarts = opt.restarts;
    config.max_sweeps = opt.max_sweeps;
    config.tolerance = opt.tolerance;
    config.seed = opt.dca_seed;
    const DcaFit fit = dca_fit(joint_empirical(obs), config);
    if (fit.identifiability_warning) {
        std::cerr << "warning: the fit is not identifiable (K < 3 or a near-singular channel); "
                     "the recovered system may be arbitrary\n";
    }
    if (fit.low_source_mass_warning) {
        std::cerr << "warning: fitted source mass below 1e-3\n";
    }
    std::vector<double> b_values;
    for (const Channel& ch : fit.system.channels) b_values.push_back(ch(0, 0));
    Report report;
    report.algorithm = "dca";
    report.seed = config.seed;
    report.n = obs.rows();
    report.copies = obs.copies();
    report.p_hat = fit.system.source.probs();
    report.b_hat = std::move(b_values);
    report.residual_l1 = fit.residual_l1;
    report.residual_l2 = fit.residual_l2;
    report.runtime_ms = ms_since(start);
    return EstimationOutcome{fit.system, std::move(report)};
}

int cmd_estimate(const std::string& obs_dir, const EstimatorOptions& opt,
                 const std::string& out_file) {
    const ObservationSet set = load_observation_dir(obs_dir);
    EstimationOutcome outcome = run_estimator(set.observations, opt);
    if (!out_file.empty()) {
        write_report(out_file, outcome.report);
    }
    std::cout << "p_hat(0) = " << round_sig((*outcome.report.p_hat)[0], 12) << "\n";
    for (std::size_t j = 0; j < outcome.report.b_hat->size(); ++j) {
        std::cout << "b_hat_" << j + 1 << " = " << round_sig((*outcome.report.b_hat)[j], 12)
                  << "\n";
    }
    return 0;
}

int cmd_denoise(const std::string& obs_dir, const EstimatorOptions& opt,
                const std::string& truth_system_file, const std::string& distortion_spec,
                const std::string& out_image, const std::string& report_file) {
    const auto start = Clock::now();
    const ObservationSet set = load_observation_dir(obs_dir);
    const ObservationMatrix& obs = set.observations;

    std::optional<EstimationOutcome> outcome;
    std::optional<DependentComponentSystem> system;
    if (opt.method == "genie") {
        if (truth_system_file.empty()) throw InputError("denoise --method genie needs --truth-system");
        system = read_system_json(truth_system_file);
        if (system->copies() != obs.copies()) {
            throw InputError("truth system copy count does not match the observations");
        }
    } else {
        if (opt.method == "dca" && obs.copies() < 3) {
            throw InputError("denoise --method dca needs at least three copies");
        }
        outcome = run_estimator(obs, opt);
        system = outcome->system;
    }

    const DistortionMeasure d = load_distortion(distortion_spec, system->alphabet_size());
    const McaDecoder decoder = build_mca(*system, d);
    const std::vector<std::uint8_t> decoded = decode(decoder, obs);

    BinaryImage img;
    img.width = set.manifest.width;
    img.height = set.manifest.height;
    img.pixels = decoded;
    write_pbm(out_image, img);
    // Flipped twin, for eyeballing against the original.
    for (std::uint8_t& p : img.pixels) p = static_cast<std::uint8_t>(1 - p);
    fs::path inverted = out_image;
    inverted.replace_filename(inverted.stem().string() + "_inverted" + inverted.extension().string());
    write_pbm(inverted, img);

    Report report = outcome.has_value() ? std::move(outcome->report) : Report{};
    report.algorithm = opt.method;
    report.n = obs.rows();
    report.copies = obs.copies();
    report.expected_distortion = decoder.expected_distortion;
    if (set.manifest.truth_file.has_value()) {
        const BinaryImage truth = read_pbm(fs::path(obs_dir) / *set.manifest.truth_file);
        report.achieved_distortion_up_to_permutation =
            min_permuted_distortion(truth.pixels, decoded, d).value;
    }
    report.runtime_ms = ms_since(start);
    if (!report_file.empty()) write_report(report_file, report);

    std::cout << "expected distortion " << round_sig(*report.expected_distortion, 12) << "\n";
    if (report.achieved_distortion_up_to_permutation.has_value()) {
        std::cout << "achieved distortion (up to relabeling) "
                  << round_sig(*report.achieved_distortion_up_to_permutation, 12) << "\n";
    }
    return 0;
}

int cmd_evaluate(const std::string& truth_file, const std::string& estimate_file,
                 const std::string& distortion_spec, const std::string& out_file) {
    const BinaryImage truth = read_pbm(truth_file);
    const BinaryImage estimate = read_pbm(estimate_file);
    if (truth.size() != estimate.size()) {
        throw InputError("evaluate: image sizes differ");
    }
    const DistortionMeasure d = load_distortion(distortion_spec, 2);
    const EvaluatedDistortion result = min_permuted_distortion(truth.pixels, estimate.pixels, d);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g\n", result.value);
    std::cout << buf;
    if (!out_file.empty()) {
        nlohmann::ordered_json doc;
        doc["distortion"] = round_sig(result.value, 12);
        doc["permutation"] = result.tau;
        std::ofstream out(out_file);
        if (!out) throw InputError("cannot open " + out_file + " for writing");
        out << doc.dump(2) << "\n";
    }
    return 0;
}

int cmd_baseline(const std::string& obs_dir, const std::string& rule,
                 const std::string& truth_system_file, const std::string& out_file) {
    const auto start = Clock::now();
    const ObservationSet set = load_observation_dir(obs_dir);
    const ObservationMatrix& obs = set.observations;

    std::optional<DependentComponentSystem> truth_system;
    if (!truth_system_file.empty()) truth_system = read_system_json(truth_system_file);

    Report report;
    report.n = obs.rows();
    report.copies = obs.copies();

    if (rule == "majority") {
        report.algorithm = "baseline-majority";
        const std::vector<std::uint8_t> decoded = majority_decode(obs);
        if (truth_system.has_value()) {
            // exact expected error of the raw majority vote
            const JointDistribution q = product_output(*truth_system);
            double correct = 0.0;
            std::vector<int> tuple(static_cast<std::size_t>(obs.copies()));
            for (int x = 0; x < 2; ++x) {
                for (std::size_t idx = 0; idx < q.cells(); ++idx) {
                    q.tuple_of(idx, tuple);
                    int ones = 0;
                    for (int y : tuple) ones += y;
                    const int vote = 2 * ones > obs.copies() ? 1 : 0;
                    if (vote != x) continue;
                    double w = truth_system->source[x];
                    for (int j = 0; j < obs.copies(); ++j) {
                        w *= truth_system->channels[static_cast<std::size_t>(j)](
                            x, tuple[static_cast<std::size_t>(j)]);
                    }
                    correct += w;
                }
            }
            report.expected_distortion = 1.0 - correct;
        }
        if (set.manifest.truth_file.has_value()) {
            const BinaryImage truth = read_pbm(fs::path(obs_dir) / *set.manifest.truth_file);
            report.achieved_distortion_up_to_permutation =
                min_permuted_distortion(truth.pixels, decoded, DistortionMeasure::hamming(2)).value;
        }
    } else if (rule == "colour-agnostic") {
        if (!truth_system.has_value()) {
            throw InputError("baseline --rule colour-agnostic needs --truth-system");
        }
        report.algorithm = "baseline-colour-agnostic";
        double best = 1.0;
        for (int j = 0; j < truth_system->copies(); ++j) {
            const double v = colour_agnostic_baseline(
                truth_system->source, truth_system->channels[static_cast<std::size_t>(j)]);
            std::cout << "copy " << j + 1 << ": " << round_sig(v, 12) << "\n";
            best = std::min(best, v);
        }
        report.expected_distortion = best;
    } else {
        throw InputError("unknown baseline rule '" + rule + "'");
    }
    report.runtime_ms = ms_since(start);
    if (!out_file.empty()) write_report(out_file, report);
    if (report.expected_distortion.has_value()) {
        std::cout << "expected distortion " << round_sig(*report.expected_distortion, 12) << "\n";
    }
    if (report.achieved_distortion_up_to_permutation.has_value()) {
        std::cout << "achieved distortion (up to relabeling) "
                  << round_sig(*report.achieved_distortion_up_to_permutation, 12) << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"universal discrete denoising from multiple corrupted copies"};
    app.require_subcommand(1);

    SimulateOptions sim_opt;
    CLI::App* sim = app.add_subcommand("simulate", "corrupt an image through K memoryless channels");
    sim->add_option("--out", sim_opt.out_dir, "output directory")->required();
    sim->add_option("--image", sim_opt.image, "source PBM image");
    sim->add_option("--p", sim_opt.p_list, "source type, e.g. 0.55 or 0.55,0.45");
    sim->add_option("--n", sim_opt.n, "source length when synthesizing");
    sim->add_option("--width", sim_opt.width, "image width when synthesizing");
    sim->add_option("--height", sim_opt.height, "image height when synthesizing");
    sim->add_option("--channels", sim_opt.channels_file, "BSC csv or channel json");
    sim->add_option("--random-bsc", sim_opt.random_bsc, "draw K random BSCs instead");
    sim->add_option("--seed", sim_opt.seed, "64-bit seed")->required();
    sim->add_option("--mode", sim_opt.mode, "exact|iid source synthesis")
        ->check(CLI::IsMember({"exact", "iid"}));
    sim->add_flag("--no-truth", sim_opt.no_truth, "do not write truth.pbm");

    EstimatorOptions est_opt;
    std::string obs_dir;
    std::string out_file;
    CLI::App* est = app.add_subcommand("estimate", "estimate the source type and the channels");
    est->add_option("--obs", obs_dir, "observation directory")->required();
    est->add_option("--method", est_opt.method, "budda|dca")
        ->check(CLI::IsMember({"budda", "dca"}));
    est->add_option("--out", out_file, "report file");
    est->add_option("--epsilon", est_opt.epsilon, "degeneracy threshold (budda)");
    est->add_flag("--optimized", est_opt.optimized, "most-biased conditional systems (budda)");
    est->add_option("--restarts", est_opt.restarts, "multi-start count (dca)");
    est->add_option("--max-sweeps", est_opt.max_sweeps, "sweep budget per restart (dca)");
    est->add_option("--tolerance", est_opt.tolerance, "objective-decrease stall threshold (dca)");
    est->add_option("--dca-seed", est_opt.dca_seed, "restart seed (dca)");

    EstimatorOptions den_opt;
    std::string den_obs;
    std::string den_truth_system;
    std::string den_distortion = "hamming";
    std::string den_out;
    std::string den_report;
    CLI::App* den = app.add_subcommand("denoise", "estimate, build the clairvoyant decoder, decode");
    den->add_option("--obs", den_obs, "observation directory")->required();
    den->add_option("--method", den_opt.method, "budda|dca|genie")
        ->check(CLI::IsMember({"budda", "dca", "genie"}));
    den->add_option("--truth-system", den_truth_system, "system json (genie)");
    den->add_option("--distortion", den_distortion, "hamming or a json matrix file");
    den->add_option("--out", den_out, "output PBM")->required();
    den->add_option("--report", den_report, "report file");
    den->add_option("--epsilon", den_opt.epsilon, "degeneracy threshold (budda)");
    den->add_flag("--optimized", den_opt.optimized, "most-biased conditional systems (budda)");
    den->add_option("--restarts", den_opt.restarts, "multi-start count (dca)");
    den->add_option("--max-sweeps", den_opt.max_sweeps, "sweep budget per restart (dca)");
    den->add_option("--tolerance", den_opt.tolerance, "objective-decrease stall threshold (dca)");
    den->add_option("--dca-seed", den_opt.dca_seed, "restart seed (dca)");

    std::string eval_truth;
    std::string eval_estimate;
    std::string eval_distortion = "hamming";
    std::string eval_out;
    CLI::App* eval = app.add_subcommand("evaluate", "relabeling-agnostic distortion between images");
    eval->add_option("--truth", eval_truth, "truth PBM")->required();
    eval->add_option("--estimate", eval_estimate, "estimate PBM")->required();
    eval->add_option("--distortion", eval_distortion, "hamming or a json matrix file");
    eval->add_option("--out", eval_out, "json output file");

    std::string base_obs;
    std::string base_rule = "majority";
    std::string base_truth_system;
    std::string base_out;
    CLI::App* base = app.add_subcommand("baseline", "reference decoding rules");
    base->add_option("--obs", base_obs, "observation directory")->required();
    base->add_option("--rule", base_rule, "majority|colour-agnostic")
        ->check(CLI::IsMember({"majority", "colour-agnostic"}));
    base->add_option("--truth-system", base_truth_system, "system json");
    base->add_option("--out", base_out, "report file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_opt);
        if (est->parsed()) return cmd_estimate(obs_dir, est_opt, out_file);
        if (den->parsed()) {
            return cmd_denoise(den_obs, den_opt, den_truth_system, den_distortion, den_out,
                               den_report);
        }
        if (eval->parsed()) return cmd_evaluate(eval_truth, eval_estimate, eval_distortion, eval_out);
        if (base->parsed()) return cmd_baseline(base_obs, base_rule, base_truth_system, base_out);
    } catch (const DegenerateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace udd
