#include "tvparcor/io.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/whittle.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace tvparcor::io {

// ---- delimited text ---------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_field(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t col, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
}

}  // namespace

TimeSeries parse_series(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::string_view all(text);
  std::size_t lineno = 0;
  while (!all.empty()) {
    const auto nl = all.find('\n');
    const auto raw = all.substr(0, nl);
    ++lineno;
    const auto t = trim(raw);
    if (!t.empty() && t.front() != '#') lines.emplace_back(lineno, raw);
    if (nl == std::string_view::npos) break;
    all.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "no data rows");

  const auto first = lines.front().second;
  char delim = ' ';
  for (char c : {'\t', ',', ';'}) {
    if (first.find(c) != std::string_view::npos) {
      delim = c;
      break;
    }
  }

  std::vector<std::string> labels;
  std::size_t row0 = 0;
  {
    const auto fields = split(first, delim);
    double tmp;
    bool numeric = true;
    for (auto f : fields) numeric = numeric && parse_field(f, tmp);
    if (!numeric) {
      for (auto f : fields) labels.emplace_back(f);
      row0 = 1;
    }
  }
  if (row0 >= lines.size()) throw Error(ErrorCode::ParseError, "no data rows after the header");

  const std::size_t n_rows = lines.size() - row0;
  const std::size_t k = split(lines[row0].second, delim).size();
  if (!labels.empty() && labels.size() != k) {
    parse_fail(lines.front().first, 1,
               "header has " + std::to_string(labels.size()) + " fields, data rows have " +
                   std::to_string(k));
  }
  Matrix values(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto [ln, raw] = lines[row0 + r];
    const auto fields = split(raw, delim);
    if (fields.size() != k) {
      parse_fail(ln, std::min(fields.size(), k) + 1,
                 "expected " + std::to_string(k) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < k; ++c) {
      double v;
      if (!parse_field(fields[c], v)) parse_fail(ln, c + 1, "not a number: '" + std::string(fields[c]) + "'");
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteInput, "line " + std::to_string(ln) + ", column " +
                                                   std::to_string(c + 1) + ": non-finite value");
      }
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  if (labels.empty()) {
    for (std::size_t c = 1; c <= k; ++c) labels.push_back("x" + std::to_string(c));
  }
  return TimeSeries(std::move(values), std::move(labels));
}

TimeSeries read_series(const fs::path& path) { return parse_series(read_file(path)); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_series(const TimeSeries& x) {
  std::string out;
  for (int c = 0; c < x.k(); ++c) {
    if (c) out += ',';
    out += c < static_cast<int>(x.labels.size()) ? x.labels[static_cast<std::size_t>(c)]
                                                 : "x" + std::to_string(c + 1);
  }
  out += '\n';
  for (int t = 0; t < x.t_len(); ++t) {
    for (int c = 0; c < x.k(); ++c) {
      if (c) out += ',';
      out += format_double(x.values(t, c));
    }
    out += '\n';
  }
  return out;
}

void write_series(const fs::path& path, const TimeSeries& x) { write_atomic(path, format_series(x)); }

// ---- atomic files -----------------------------------------------------------

void write_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::ParseError, "not a number: " + s);
  }
  if (!j.is_number()) throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
  return j.get<double>();
}

// ---- tensor container -------------------------------------------------------

std::int64_t Tensor::count() const {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor from_matrix(std::string name, const Matrix& m) {
  Tensor t{std::move(name), {m.rows(), m.cols()}, {}, json::object()};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data.push_back(m(i, j));
  return t;
}

Tensor from_vector(std::string name, const Vector& v) {
  return Tensor{std::move(name), {v.size()}, std::vector<double>(v.data(), v.data() + v.size()),
                json::object()};
}

Tensor from_doubles(std::string name, std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return Tensor{std::move(name), {n}, std::move(v), json::object()};
}

Tensor from_matrices(std::string name, const std::vector<Matrix>& ms) {
  const std::int64_t rows = ms.empty() ? 0 : ms.front().rows();
  const std::int64_t cols = ms.empty() ? 0 : ms.front().cols();
  Tensor t{std::move(name), {static_cast<std::int64_t>(ms.size()), rows, cols}, {}, json::object()};
  t.data.reserve(static_cast<std::size_t>(t.count()));
  for (const auto& m : ms) {
    if (m.rows() != rows || m.cols() != cols) {
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix stack " + t.name);
    }
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) t.data.push_back(m(i, j));
  }
  return t;
}

Tensor from_vectors(std::string name, const std::vector<Vector>& vs) {
  const std::int64_t n = vs.empty() ? 0 : vs.front().size();
  Tensor t{std::move(name), {static_cast<std::int64_t>(vs.size()), n}, {}, json::object()};
  t.data.reserve(static_cast<std::size_t>(t.count()));
  for (const auto& v : vs) {
    if (v.size() != n) throw Error(ErrorCode::DimensionMismatch, "ragged vector stack " + t.name);
    t.data.insert(t.data.end(), v.data(), v.data() + v.size());
  }
  return t;
}

namespace {

void expect_rank(const Tensor& t, std::size_t rank) {
  if (t.shape.size() != rank) {
    throw Error(ErrorCode::DimensionMismatch,
                "tensor " + t.name + " has rank " + std::to_string(t.shape.size()) + ", expected " +
                    std::to_string(rank));
  }
}

}  // namespace

Matrix to_matrix(const Tensor& t) {
  expect_rank(t, 2);
  Matrix m(t.shape[0], t.shape[1]);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.data[p++];
  return m;
}

Vector to_vector(const Tensor& t) {
  expect_rank(t, 1);
  return Eigen::Map<const Vector>(t.data.data(), t.shape[0]);
}

std::vector<Matrix> to_matrices(const Tensor& t) {
  expect_rank(t, 3);
  std::vector<Matrix> out;
  std::size_t p = 0;
  for (std::int64_t s = 0; s < t.shape[0]; ++s) {
    Matrix m(t.shape[1], t.shape[2]);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.data[p++];
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<Vector> to_vectors(const Tensor& t) {
  expect_rank(t, 2);
  std::vector<Vector> out;
  for (std::int64_t s = 0; s < t.shape[0]; ++s) {
    out.push_back(Eigen::Map<const Vector>(t.data.data() + s * t.shape[1], t.shape[1]));
  }
  return out;
}

void TensorSet::add(Tensor t) {
  if (contains(t.name)) throw Error(ErrorCode::InvalidArgument, "duplicate tensor " + t.name);
  if (t.count() != static_cast<std::int64_t>(t.data.size())) {
    throw Error(ErrorCode::DimensionMismatch, "tensor " + t.name + " shape does not match its data");
  }
  tensors_.push_back(std::move(t));
}

bool TensorSet::contains(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return true;
  return false;
}

const Tensor& TensorSet::get(const std::string& name) const {
  for (const auto& t : tensors_)
    if (t.name == name) return t;
  throw Error(ErrorCode::IntegrityError, "missing tensor " + name);
}

std::pair<std::string, json> encode(const TensorSet& set, const std::string& file_name) {
  std::string payload;
  json entries = json::array();
  for (const auto& t : set.tensors()) {
    json strides = json::array();
    std::int64_t s = 1;
    std::vector<std::int64_t> st(t.shape.size());
    for (std::size_t d = t.shape.size(); d-- > 0;) {
      st[d] = s;
      s *= t.shape[d];
    }
    for (auto v : st) strides.push_back(v);
    json e = {{"name", t.name},     {"dtype", "float64-le"},       {"shape", t.shape},
              {"strides", strides}, {"offset", payload.size()}, {"count", t.data.size()}};
    if (!t.attrs.empty()) e["attrs"] = t.attrs;
    entries.push_back(std::move(e));
    const std::size_t at = payload.size();
    payload.resize(at + t.data.size() * sizeof(double));
    char* dst = payload.data() + at;
    for (double v : t.data) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(dst, &bits, sizeof bits);
      dst += sizeof bits;
    }
  }
  json index = {{"file", file_name},
                {"bytes", payload.size()},
                {"sha256", sha256_hex(payload)},
                {"tensors", std::move(entries)}};
  return {std::move(payload), std::move(index)};
}

TensorSet decode(const std::string& payload, const json& index) {
  try {
    if (index.at("bytes").get<std::size_t>() != payload.size()) {
      throw Error(ErrorCode::IntegrityError, "payload size does not match the manifest");
    }
    if (index.at("sha256").get<std::string>() != sha256_hex(payload)) {
      throw Error(ErrorCode::IntegrityError, "payload hash does not match the manifest");
    }
    TensorSet set;
    for (const auto& e : index.at("tensors")) {
      Tensor t;
      t.name = e.at("name").get<std::string>();
      t.shape = e.at("shape").get<std::vector<std::int64_t>>();
      if (e.contains("attrs")) t.attrs = e.at("attrs");
      const auto offset = e.at("offset").get<std::size_t>();
      const auto count = e.at("count").get<std::size_t>();
      if (offset + count * sizeof(double) > payload.size()) {
        throw Error(ErrorCode::IntegrityError, "tensor " + t.name + " runs past the payload");
      }
      t.data.resize(count);
      const char* src = payload.data() + offset;
      for (auto& v : t.data) {
        std::uint64_t bits;
        std::memcpy(&bits, src, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        v = std::bit_cast<double>(bits);
        src += sizeof bits;
      }
      set.add(std::move(t));
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IntegrityError, std::string("malformed tensor index: ") + e.what());
  }
}

void save_container(const fs::path& dir, const std::string& stem, const TensorSet& set, json meta) {
  auto [payload, index] = encode(set, stem + ".bin");
  meta["payload"] = std::move(index);
  write_atomic(dir / (stem + ".bin"), payload);
  write_json(dir / (stem + ".json"), meta);
}

std::pair<json, TensorSet> load_container(const fs::path& dir, const std::string& stem) {
  json meta = read_json(dir / (stem + ".json"));
  if (!meta.contains("payload")) throw Error(ErrorCode::IntegrityError, "manifest has no payload index");
  const auto file = meta["payload"].value("file", stem + ".bin");
  TensorSet set = decode(read_file(dir / file), meta["payload"]);
  return {std::move(meta), std::move(set)};
}

// ---- fit bundles ------------------------------------------------------------

json to_json(const selection::SelectionReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"order", e.order},
                       {"delta_f", number(e.delta_f)},
                       {"delta_b", number(e.delta_b)},
                       {"loglik_f", number(e.loglik_f)},
                       {"loglik_b", number(e.loglik_b)},
                       {"loglik_plugin", number(e.loglik_plugin)},
                       {"loglik_window", number(e.loglik_window)},
                       {"p_dic_stage", number(e.p_dic_stage)},
                       {"p_dic_cum", number(e.p_dic_cum)},
                       {"dic", number(e.dic)},
                       {"n_obs", e.n_obs}});
  }
  json grid = json::array();
  for (double g : report.grid) grid.push_back(number(g));
  json scree = json::array();
  for (const auto& p : selection::scree_values(report)) {
    scree.push_back({{"order", p.order}, {"loglik", number(p.loglik)}, {"pct_change", number(p.pct_change)}});
  }
  return {{"entries", std::move(entries)}, {"chosen_order", report.chosen_order},
          {"grid", std::move(grid)},       {"n_samples", report.n_samples},
          {"seed", report.seed},           {"scree", std::move(scree)}};
}

selection::SelectionReport report_from_json(const json& j) {
  selection::SelectionReport r;
  for (const auto& e : j.at("entries")) {
    selection::OrderEntry o;
    o.order = e.at("order").get<int>();
    o.delta_f = to_double(e.at("delta_f"));
    o.delta_b = to_double(e.at("delta_b"));
    o.loglik_f = to_double(e.at("loglik_f"));
    o.loglik_b = to_double(e.at("loglik_b"));
    o.loglik_plugin = to_double(e.at("loglik_plugin"));
    o.loglik_window = to_double(e.at("loglik_window"));
    o.p_dic_stage = to_double(e.at("p_dic_stage"));
    o.p_dic_cum = to_double(e.at("p_dic_cum"));
    o.dic = to_double(e.at("dic"));
    o.n_obs = e.at("n_obs").get<int>();
    r.entries.push_back(o);
  }
  r.chosen_order = j.at("chosen_order").get<int>();
  for (const auto& g : j.at("grid")) r.grid.push_back(to_double(g));
  r.n_samples = j.at("n_samples").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

namespace {

std::string dir_name(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

json encode_record(const StageRecord& rec, TensorSet& set) {
  const std::string p = "stage" + std::to_string(rec.stage) + "/" + dir_name(rec.direction) + "/";
  set.add(from_matrices(p + "coefficients", rec.coefficients));
  if (rec.has_covariances()) set.add(from_matrices(p + "coefficient_cov", rec.coefficient_cov));
  set.add(from_vector(p + "discount", rec.discount.delta));
  set.add(from_vector(p + "prior_m0", rec.prior.m0));
  set.add(from_matrix(p + "prior_c0", rec.prior.c0.matrix()));
  set.add(from_matrix(p + "prior_s0", rec.prior.s0.matrix()));
  set.add(from_matrix(p + "final_noise", rec.final_noise));
  set.add(from_vector(p + "final_filtered_mean", rec.final_filtered_mean));
  set.add(from_matrix(p + "final_filtered_cov", rec.final_filtered_cov));
  return {{"stage", rec.stage},
          {"direction", dir_name(rec.direction)},
          {"range", {rec.range.lo, rec.range.hi}},
          {"loglik", number(rec.loglik)},
          {"prior_n0", number(rec.prior.n0)},
          {"covariances", rec.has_covariances()}};
}

StageRecord decode_record(const json& j, const TensorSet& set) {
  StageRecord rec;
  rec.stage = j.at("stage").get<int>();
  rec.direction = j.at("direction").get<std::string>() == "forward" ? Direction::Forward
                                                                     : Direction::Backward;
  rec.range = {j.at("range").at(0).get<int>(), j.at("range").at(1).get<int>()};
  rec.loglik = to_double(j.at("loglik"));
  const std::string p = "stage" + std::to_string(rec.stage) + "/" + dir_name(rec.direction) + "/";
  rec.coefficients = to_matrices(set.get(p + "coefficients"));
  if (j.at("covariances").get<bool>()) rec.coefficient_cov = to_matrices(set.get(p + "coefficient_cov"));
  rec.discount.delta = to_vector(set.get(p + "discount"));
  rec.prior.m0 = to_vector(set.get(p + "prior_m0"));
  rec.prior.c0 = SymMatrix(to_matrix(set.get(p + "prior_c0")));
  rec.prior.s0 = SymMatrix(to_matrix(set.get(p + "prior_s0")));
  rec.prior.n0 = to_double(j.at("prior_n0"));
  rec.final_noise = to_matrix(set.get(p + "final_noise"));
  rec.final_filtered_mean = to_vector(set.get(p + "final_filtered_mean"));
  rec.final_filtered_cov = to_matrix(set.get(p + "final_filtered_cov"));
  if (static_cast<int>(rec.coefficients.size()) != rec.range.size()) {
    throw Error(ErrorCode::IntegrityError, "stage " + std::to_string(rec.stage) + " range does not match its data");
  }
  return rec;
}

json number_list(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

std::vector<double> number_list(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_double(x));
  return out;
}

// Manifest and payload of a bundle; saving and comparison share this encoding.
std::pair<json, std::string> bundle_files(const FitBundle& b) {
  if (!b.parcor && !b.tvvar) throw Error(ErrorCode::InvalidArgument, "empty bundle");
  TensorSet set;
  json m = {{"format", "tvparcor-bundle"}, {"version", kBundleVersion}, {"kind", b.kind()}};
  m["config"] = b.config;
  m["config_hash"] = sha256_hex(b.config.dump());
  if (b.parcor) {
    const ParcorFit& f = *b.parcor;
    json stages = json::array();
    for (std::size_t i = 0; i < f.forward.size(); ++i) {
      stages.push_back(encode_record(f.forward[i], set));
      stages.push_back(encode_record(f.backward[i], set));
    }
    set.add(from_matrix("residual_noise", f.residual_noise));
    m["parcor"] = {{"order", f.order}, {"k", f.k},           {"t_len", f.t_len},
                   {"labels", f.labels}, {"grid", number_list(f.grid)}, {"stages", std::move(stages)}};
    // Derived VAR coefficients for consumers that do not run the recursion.
    const TvvarCoefficients c = whittle::parcor_to_tvvar(f);
    std::vector<Matrix> flat;
    for (const auto& at : c.forward) {
      Matrix row(c.k, c.k * c.order);
      for (int j = 0; j < c.order; ++j) row.middleCols(j * c.k, c.k) = at[static_cast<std::size_t>(j)];
      flat.push_back(std::move(row));
    }
    Tensor t = from_matrices("tvvar/coefficients", flat);
    t.attrs = {{"layout", "[t][i][(j-1)*K + l] = A_{t,j}(i,l)"}, {"range", {c.range.lo, c.range.hi}}};
    set.add(std::move(t));
  }
  if (b.selection) m["selection"] = to_json(*b.selection);
  if (b.tvvar) {
    const auto& v = *b.tvvar;
    set.add(from_vectors("baseline/smoothed_mean", v.smoothed_mean));
    if (!v.smoothed_cov.empty()) set.add(from_matrices("baseline/smoothed_cov", v.smoothed_cov));
    set.add(from_matrix("baseline/noise", v.noise));
    m["baseline"] = {{"order", v.order},
                     {"k", v.k},
                     {"range", {v.range.lo, v.range.hi}},
                     {"discount", number(v.discount)},
                     {"grid", number_list(v.grid)},
                     {"grid_loglik", number_list(v.grid_loglik)},
                     {"loglik", number(v.loglik)},
                     {"covariances", !v.smoothed_cov.empty()}};
  }
  auto [payload, index] = encode(set, "fit.bin");
  m["payload"] = std::move(index);
  return {std::move(m), std::move(payload)};
}

}  // namespace

void save_bundle(const fs::path& dir, const FitBundle& bundle) {
  auto [manifest, payload] = bundle_files(bundle);
  fs::create_directories(dir);
  write_atomic(dir / "fit.bin", payload);
  write_json(dir / "timings.json", bundle.timings);
  write_json(dir / "fit.json", manifest);
}

FitBundle load_bundle(const fs::path& dir) {
  if (!fs::exists(dir / "fit.json")) {
    throw Error(ErrorCode::IoError, "no bundle manifest in " + dir.string());
  }
  auto [m, set] = load_container(dir, "fit");
  try {
    if (m.at("format") != "tvparcor-bundle") throw Error(ErrorCode::IntegrityError, "not a fit bundle");
    if (m.at("version").get<int>() != kBundleVersion) {
      throw Error(ErrorCode::IntegrityError, "unsupported bundle version");
    }
    if (sha256_hex(m.at("config").dump()) != m.at("config_hash").get<std::string>()) {
      throw Error(ErrorCode::IntegrityError, "config hash does not match the manifest");
    }
    FitBundle b;
    b.config = m.at("config");
    if (m.contains("parcor")) {
      const json& p = m["parcor"];
      ParcorFit f;
      f.order = p.at("order").get<int>();
      f.k = p.at("k").get<int>();
      f.t_len = p.at("t_len").get<int>();
      f.labels = p.at("labels").get<std::vector<std::string>>();
      f.grid = number_list(p.at("grid"));
      for (const auto& s : p.at("stages")) {
        StageRecord rec = decode_record(s, set);
        (rec.direction == Direction::Forward ? f.forward : f.backward).push_back(std::move(rec));
      }
      if (static_cast<int>(f.forward.size()) != f.order || f.backward.size() != f.forward.size()) {
        throw Error(ErrorCode::IntegrityError, "stage count does not match the order");
      }
      f.residual_noise = to_matrix(set.get("residual_noise"));
      b.parcor = std::move(f);
    }
    if (m.contains("selection")) b.selection = report_from_json(m["selection"]);
    if (m.contains("baseline")) {
      const json& j = m["baseline"];
      baseline::TvvarDlmFit v;
      v.order = j.at("order").get<int>();
      v.k = j.at("k").get<int>();
      v.range = {j.at("range").at(0).get<int>(), j.at("range").at(1).get<int>()};
      v.discount = to_double(j.at("discount"));
      v.grid = number_list(j.at("grid"));
      v.grid_loglik = number_list(j.at("grid_loglik"));
      v.loglik = to_double(j.at("loglik"));
      v.smoothed_mean = to_vectors(set.get("baseline/smoothed_mean"));
      if (j.at("covariances").get<bool>()) v.smoothed_cov = to_matrices(set.get("baseline/smoothed_cov"));
      v.noise = to_matrix(set.get("baseline/noise"));
      b.tvvar = std::move(v);
    }
    if (!b.parcor && !b.tvvar) throw Error(ErrorCode::IntegrityError, "bundle holds no fit");
    if (fs::exists(dir / "timings.json")) b.timings = read_json(dir / "timings.json");
    if (b.tvvar && b.timings.contains("baseline_fit_seconds")) {
      b.tvvar->wall_clock = b.timings["baseline_fit_seconds"].get<double>();
    }
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IntegrityError, std::string("malformed bundle manifest: ") + e.what());
  }
}

bool identical(const FitBundle& a, const FitBundle& b) {
  const auto fa = bundle_files(a);
  const auto fb = bundle_files(b);
  return fa.first.dump() == fb.first.dump() && fa.second == fb.second && a.timings == b.timings;
}

std::pair<TvvarCoefficients, Matrix> bundle_coefficients(const FitBundle& bundle) {
  if (bundle.parcor) return {whittle::parcor_to_tvvar(*bundle.parcor), bundle.parcor->residual_noise};
  if (bundle.tvvar) return {baseline::to_coefficients(*bundle.tvvar), bundle.tvvar->noise};
  throw Error(ErrorCode::InvalidArgument, "empty bundle");
}

}  // namespace tvparcor::io
