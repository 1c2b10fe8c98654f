#pragma once

#include <string>
#include <vector>

#include "pgds/evaluation.hpp"
#include "pgds/gibbs.hpp"
#include "pgds/model.hpp"

namespace pgds {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetBundle {
  CountMatrix counts;
  std::vector<std::string> feature_labels;  // size V
  std::vector<std::string> time_labels;     // size T
  std::string provenance;
};

// Counts file: a "V T" header line followed by "t v count" triplet lines
// (1-based, count >= 1). '#' lines are comments and are kept as provenance.
// Duplicate (t, v) lines are summed.
DatasetBundle load_counts(const std::string& path);
void save_counts(const CountMatrix& counts, const std::string& path,
                 const std::string& provenance = "");

// Optional label files: one label per line.
std::vector<std::string> load_labels(const std::string& path, int expected);

// Mask file: lines "smooth t" / "forecast t".
Mask load_mask(const std::string& path, int T);
void save_mask(const Mask& mask, const std::string& path);

// Chain files are versioned JSON with an explicit field manifest; loading a
// saved chain restores it bit-exactly. A version mismatch is an error.
void save_chain(const SampleChain& chain, const std::string& path);
SampleChain load_chain(const std::string& path);

// Prediction table: "v t true pred task" rows, reals with 17 significant digits.
void save_predictions(const std::vector<PredictionCell>& cells, const std::string& path);
std::vector<PredictionCell> load_predictions(const std::string& path);

// Run configuration: line-oriented "key=value" text; unknown keys are errors
// so typos cannot silently change a run.
struct RunConfig {
  Hyperparams hyper;
  Schedule schedule;
  std::uint64_t seed = 1;
  std::string data_path;
  std::string mask_path;
  std::string output_path;

  void validate() const;
};

RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& config, const std::string& line, int line_no);

}  // namespace pgds
