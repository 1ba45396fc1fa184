#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udd/empirical.hpp"
#include "udd/model.hpp"

namespace udd {

/// Row-major binary image; 0 = white, 1 = black (PBM convention).
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::size_t size() const { return pixels.size(); }
};

enum class PbmFormat {
    Ascii,   // P1
    Packed,  // P4
};

/// Reads P1/P4 bitmaps exactly. P2/P5 graymaps are accepted as a lossy
/// convenience: values at or below half of maxval become black.
BinaryImage read_pbm(const std::filesystem::path& path);
void write_pbm(const std::filesystem::path& path, const BinaryImage& img,
               PbmFormat format = PbmFormat::Packed);

/// CSV with header "index,b00", one BSC per row.
std::vector<BscParam> read_bsc_csv(const std::filesystem::path& path);
void write_bsc_csv(const std::filesystem::path& path, std::span<const BscParam> params);

/// JSON {"channels": [LxL row-major matrices...]}; a bare array also parses.
std::vector<Channel> read_channels_json(const std::filesystem::path& path);
void write_channels_json(const std::filesystem::path& path, std::span<const Channel> channels);

/// JSON {"source": [...], "channels": [...]} or {"source": [...], "bsc": [...]}.
DependentComponentSystem read_system_json(const std::filesystem::path& path);
void write_system_json(const std::filesystem::path& path, const DependentComponentSystem& sys);

/// JSON {"distortion": LxL matrix} or a bare matrix.
DistortionMeasure read_distortion_json(const std::filesystem::path& path);

/// Estimation/denoising result document. Keys are written in a fixed order
/// and every float is rounded to 12 significant digits first.
struct Report {
    std::string algorithm;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n;
    std::optional<int> copies;
    std::optional<std::vector<double>> p_hat;
    std::optional<std::vector<double>> b_hat;
    std::optional<std::string> branch;
    std::optional<double> residual_l1;
    std::optional<double> residual_l2;
    std::optional<double> expected_distortion;
    std::optional<double> achieved_distortion_up_to_permutation;
    double runtime_ms = 0.0;
};

void write_report(const std::filesystem::path& path, const Report& report);

/// Nearest double with the given number of significant decimal digits.
double round_sig(double x, int digits);

/// manifest.json sitting next to the observation copies.
struct ObservationManifest {
    std::uint64_t n = 0;
    int copies = 0;
    int width = 0;
    int height = 0;
    std::uint64_t seed = 0;
    std::string rng;
    std::string mode;
    std::optional<std::vector<double>> source_type;
    std::optional<std::vector<double>> bsc;
    std::vector<std::string> copy_files;
    std::optional<std::string> truth_file;
};

void write_manifest(const std::filesystem::path& path, const ObservationManifest& manifest);
ObservationManifest read_manifest(const std::filesystem::path& path);

struct ObservationSet {
    ObservationMatrix observations;
    ObservationManifest manifest;
};

/// Loads manifest.json plus every copy image from a directory written by
/// the simulate command.
ObservationSet load_observation_dir(const std::filesystem::path& dir);

}  // namespace udd
