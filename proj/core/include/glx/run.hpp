#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glx/model.hpp"
#include "glx/point_process.hpp"

namespace glx {

enum class Experiment { Covariance, Sample, Maxima, SteinChen, PointProcess, Audit };

Experiment experiment_from_string(const std::string& name);
std::string to_string(Experiment e);

// Thrown for invalid configuration; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Thrown when a numerical certificate fails; exit code 3.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Experiment experiment = Experiment::Covariance;
    ModelSpec model;
    int n = 8;
    std::vector<int> sizes;  // sweep sizes (steinchen, audit); falls back to {n}
    double delta = 0.0;
    std::vector<double> z_grid{0.0};
    int replicates = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    DependencyRadiusPolicy policy;
    bool bulk_mode = false;                       // maxima
    double rescale_count = 0;                     // maxima override (0 = auto)
    VarianceMode variance_mode = VarianceMode::FiniteVolume;
    std::vector<CellSpec> cells;                  // pointprocess
    double audit_max_radius = 8.0;
    std::vector<double> slope_grid;               // membrane (A3) slope audit
    std::string out_dir = "out";

    // validated, defaults resolved; throws ConfigError
    static RunConfig from_json(const nlohmann::json& merged);
    nlohmann::json canonical_json() const;
    void validate() const;
};

nlohmann::json load_json_file(const std::filesystem::path& path);
// defaults <- file <- overrides (seed/workers/out from the command line)
nlohmann::json merge_config(const nlohmann::json& defaults, const nlohmann::json& file,
                            const nlohmann::json& overrides);
nlohmann::json builtin_defaults();

struct RunResult {
    int exit_code = 0;
    std::string manifest_path;
    std::vector<std::string> outputs;
};

RunResult run(const RunConfig& config);

// long-format plot CSV (x, y, series)
void emit_plotdata(const std::filesystem::path& path,
                   const std::vector<std::tuple<double, double, std::string>>& points);

// Concatenates one named output across several run directories after checking
// that every manifest carries the same config hash; mismatches throw.
void merge_run_outputs(const std::vector<std::filesystem::path>& run_dirs,
                       const std::string& output_name, const std::filesystem::path& merged);

}  // namespace glx
