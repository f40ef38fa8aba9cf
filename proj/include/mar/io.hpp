#pragma once

#include "mar/experiment.hpp"
#include "mar/matcore.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mar {

// Series files are long-format CSV with the header `t,row,col,value`, 1-based
// indices and every (t, row, col) triple present exactly once. Dimensions are
// the maxima of the index columns.

MatrixSeries read_series_csv(std::istream& in);
MatrixSeries read_series_file(const std::string& path);
void write_series_csv(std::ostream& out, const MatrixSeries& series);
void write_series_file(const std::string& path, const MatrixSeries& series);

inline constexpr const char* kModelFormat = "mar-model/1";

/// Coefficients plus the metadata of the fit that produced them.
struct ModelFile {
    MarCoefficients coeffs;
    std::string estimator = "alse";
    std::optional<BandSpec> band;
    std::optional<double> lambda_A;
    std::optional<double> lambda_B;
    std::string tuning;
    int iterations = 0;
    bool converged = false;
    double final_delta_A = 0.0;
    double final_delta_B = 0.0;
    std::uint64_t seed = 0;
};

void write_model(std::ostream& out, const ModelFile& model);
void write_model_file(const std::string& path, const ModelFile& model);
/// Rejects any format line other than kModelFormat.
ModelFile read_model(std::istream& in);
ModelFile read_model_file(const std::string& path);

/// A benchmark run: the experiment plus where its table goes.
struct ExperimentConfig {
    ExperimentSpec spec;
    std::string output = "results.csv";
};

/// key = value lines; `#` starts a comment. Unknown or repeated keys are
/// errors, and the resulting spec is validated.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig read_experiment_config(const std::string& path);

/// Writes through a temporary file and renames it into place.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace mar
