#pragma once

// File formats.
//
//   data CSV       header y1..ym,x1..xp; one observation per row
//   samples JSONL  header line {"format":"dmbpp-samples","version":1,"model":..,...}
//                  then one retained draw per line; allocations are 0-based
//   loglik CSV     header iter,o1..on; one retained draw per row
//   traces CSV     iter,k,gamma_eta,gamma_z,log_posterior
//   grid CSV       x1..xp,y1,..,ym,density; rows ordered by x, then y
//   metrics JSON   {"il1","linf","lpml","neg_n_waic"}
//   config JSON    see configs/default.json; every key is required
//
// Reals are written with 17 significant digits so they read back exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dmbpp/data.hpp"
#include "dmbpp/inference.hpp"
#include "dmbpp/pdr.hpp"
#include "dmbpp/sampler.hpp"

namespace dmbpp {

namespace fs = std::filesystem;

/// Thrown for unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_real(double v);

void write_dataset_csv(std::ostream& os, const Dataset& d);
Dataset read_dataset_csv(std::istream& is);
void write_dataset_csv(const fs::path& path, const Dataset& d);
Dataset read_dataset_csv(const fs::path& path);

void write_loglik_csv(std::ostream& os, const LogLikMatrix& ll, const std::vector<int>& iterations);
LogLikMatrix read_loglik_csv(std::istream& is);
LogLikMatrix read_loglik_csv(const fs::path& path);

void write_traces_csv(std::ostream& os, const PosteriorSamples& s);

void write_samples_jsonl(std::ostream& os, const PosteriorSamples& s);
void write_samples_jsonl(std::ostream& os, const PdrSamples& s);

/// Either kind of sample file; exactly one member is set.
struct LoadedSamples {
  std::optional<PosteriorSamples> dmbpp;
  std::optional<PdrSamples> pdr;
};
LoadedSamples read_samples_jsonl(std::istream& is);
LoadedSamples read_samples_jsonl(const fs::path& path);

void write_grid_csv(std::ostream& os, const DensityGrid& g);
/// Points are recovered from the file; quadrature weights are not stored.
DensityGrid read_grid_csv(std::istream& is, int m, int p);
DensityGrid read_grid_csv(const fs::path& path, int m, int p);

struct Metrics {
  std::optional<double> il1;
  std::optional<double> linf;
  std::optional<double> lpml;
  std::optional<double> neg_n_waic;
};
/// Unset fields are written as null.
std::string metrics_json(const Metrics& m);

struct GridConfig {
  double spacing = 0.02;
  int x_points = 20;
};

struct RunConfig {
  std::string model = "dmbpp";  // "dmbpp" or "pdr"
  PriorConfig prior;
  ChainConfig chain;
  PdrConfig pdr;
  GridConfig grid;

  void validate() const;
};

/// Strict: missing keys, unknown keys and wrongly typed values raise
/// ConfigError naming the key path, e.g. "chain.thin".
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const fs::path& path);
std::string config_to_json(const RunConfig& c);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

struct Manifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  double wall_clock_seconds = 0.0;
};
/// Hashes every output and writes manifest.json into dir. The wall-clock
/// field is the only non-reproducible content.
void write_manifest(const fs::path& dir, const Manifest& m);

/// Throws IoError on failure.
std::string read_text(const fs::path& path);
/// Throws IoError on failure.
void write_text(const fs::path& path, const std::string& text);

}  // namespace dmbpp
