#pragma once

// On-disk formats: delimited series files, a tensor container (little-endian
// float64 payload plus JSON index with a SHA-256 of the payload), and fit
// bundles built on it. Every file is written to a temporary sibling and renamed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tvparcor/selection.hpp"
#include "tvparcor/tvvar_baseline.hpp"

namespace tvparcor::io {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- delimited text ---------------------------------------------------------

/// Reads one row per time step, one column per component. The delimiter (tab,
/// comma, semicolon or whitespace) and an optional header row are detected.
/// Lines starting with '#' are skipped. Errors carry line and column.
TimeSeries read_series(const fs::path& path);
TimeSeries parse_series(const std::string& text);

std::string format_series(const TimeSeries& x);
void write_series(const fs::path& path, const TimeSeries& x);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

// ---- atomic files -----------------------------------------------------------

void write_atomic(const fs::path& path, const std::string& bytes);
std::string read_file(const fs::path& path);
void write_json(const fs::path& path, const json& j);
json read_json(const fs::path& path);

std::string sha256_hex(const std::string& bytes);

/// JSON number that survives NaN/inf (encoded as strings).
json number(double v);
double to_double(const json& j);

// ---- tensor container -------------------------------------------------------

struct Tensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<double> data;  // row-major
  json attrs = json::object();

  std::int64_t count() const;
};

Tensor from_matrix(std::string name, const Matrix& m);
Tensor from_vector(std::string name, const Vector& v);
Tensor from_doubles(std::string name, std::vector<double> v);
/// Stack of equally sized matrices → shape [n, rows, cols].
Tensor from_matrices(std::string name, const std::vector<Matrix>& ms);
Tensor from_vectors(std::string name, const std::vector<Vector>& vs);

Matrix to_matrix(const Tensor& t);
Vector to_vector(const Tensor& t);
std::vector<Matrix> to_matrices(const Tensor& t);
std::vector<Vector> to_vectors(const Tensor& t);

class TensorSet {
 public:
  void add(Tensor t);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const std::vector<Tensor>& tensors() const { return tensors_; }

 private:
  std::vector<Tensor> tensors_;
};

/// Serialized payload and its index ({"file", "bytes", "sha256", "tensors": [...]}).
std::pair<std::string, json> encode(const TensorSet& set, const std::string& file_name);
/// Verifies size and SHA-256 before decoding; IntegrityError on mismatch.
TensorSet decode(const std::string& payload, const json& index);

/// Writes <dir>/<stem>.bin then <dir>/<stem>.json (the JSON gets "payload" added).
void save_container(const fs::path& dir, const std::string& stem, const TensorSet& set, json meta);
std::pair<json, TensorSet> load_container(const fs::path& dir, const std::string& stem);

// ---- fit bundles ------------------------------------------------------------

inline constexpr int kBundleVersion = 1;

struct FitBundle {
  std::optional<ParcorFit> parcor;
  std::optional<selection::SelectionReport> selection;
  std::optional<baseline::TvvarDlmFit> tvvar;
  json config = json::object();
  json timings = json::object();  // kept out of the manifest so reruns stay byte-identical

  std::string kind() const { return parcor ? "parcor" : "tvvar"; }
};

/// Writes fit.bin, fit.json (manifest, last) and timings.json into `dir`.
void save_bundle(const fs::path& dir, const FitBundle& bundle);
FitBundle load_bundle(const fs::path& dir);

/// Bitwise equality of everything a bundle stores.
bool identical(const FitBundle& a, const FitBundle& b);

json to_json(const selection::SelectionReport& report);
selection::SelectionReport report_from_json(const json& j);

/// TV-VAR coefficients and innovation covariance of a bundle (Whittle for PARCOR fits).
std::pair<TvvarCoefficients, Matrix> bundle_coefficients(const FitBundle& bundle);

}  // namespace tvparcor::io
