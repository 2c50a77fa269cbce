#include "dmbpp/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "dmbpp/error.hpp"

namespace dmbpp {

using nlohmann::json;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw IoError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

bool next_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

void write_dataset_csv(std::ostream& os, const Dataset& d) {
  for (int l = 1; l <= d.m; ++l) os << (l > 1 ? "," : "") << 'y' << l;
  for (int r = 1; r <= d.p; ++r) os << ",x" << r;
  os << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (int l = 0; l < d.m; ++l) os << (l ? "," : "") << format_real(d.y[i][l]);
    for (double v : d.covariate(i)) os << ',' << format_real(v);
    os << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw IoError("data file is empty");
  const auto header = split_csv(line);
  Dataset d;
  d.m = 0;
  d.p = 0;
  for (const auto& h : header) {
    if (h == "y" + std::to_string(d.m + 1) && d.p == 0)
      ++d.m;
    else if (h == "x" + std::to_string(d.p + 1))
      ++d.p;
    else
      throw IoError("data header must be y1..ym,x1..xp (unexpected column '" + h + "')");
  }
  if (d.m < 1) throw IoError("data header has no y columns");
  std::size_t row = 1;
  std::vector<double> y(d.m), x(d.p);
  while (next_line(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw IoError("line " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " columns");
    for (int l = 0; l < d.m; ++l) y[l] = parse_real(cells[l], row);
    for (int r = 0; r < d.p; ++r) x[r] = parse_real(cells[d.m + r], row);
    try {
      d.add(SimplexPoint(y), x);
    } catch (const DomainError& e) {
      throw IoError("line " + std::to_string(row) + ": " + e.what());
    }
  }
  return d;
}

void write_dataset_csv(const fs::path& path, const Dataset& d) {
  std::ostringstream os;
  write_dataset_csv(os, d);
  write_text(path, os.str());
}

Dataset read_dataset_csv(const fs::path& path) {
  std::istringstream is(read_text(path));
  return read_dataset_csv(is);
}

void write_loglik_csv(std::ostream& os, const LogLikMatrix& ll, const std::vector<int>& iterations) {
  if (iterations.size() != ll.draws()) throw DomainError("one iteration number per draw is required");
  os << "iter";
  for (std::size_t i = 1; i <= ll.observations(); ++i) os << ",o" << i;
  os << '\n';
  for (std::size_t t = 0; t < ll.draws(); ++t) {
    os << iterations[t];
    for (double v : ll.row(t)) os << ',' << format_real(v);
    os << '\n';
  }
}

LogLikMatrix read_loglik_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw IoError("log-likelihood file is empty");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "iter") throw IoError("log-likelihood header must start with iter");
  const std::size_t n = header.size() - 1;
  LogLikMatrix ll(0, n);
  std::vector<double> row(n);
  std::size_t r = 1;
  while (next_line(is, line)) {
    ++r;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != n + 1) throw IoError("line " + std::to_string(r) + ": wrong column count");
    for (std::size_t i = 0; i < n; ++i) row[i] = parse_real(cells[i + 1], r);
    ll.push_back(row);
  }
  return ll;
}

LogLikMatrix read_loglik_csv(const fs::path& path) {
  std::istringstream is(read_text(path));
  return read_loglik_csv(is);
}

void write_traces_csv(std::ostream& os, const PosteriorSamples& s) {
  os << "iter,k,gamma_eta,gamma_z,log_posterior\n";
  for (std::size_t t = 0; t < s.states.size(); ++t)
    os << s.iterations[t] << ',' << s.k_trace[t] << ',' << s.gamma_trace[t].eta << ',' << s.gamma_trace[t].z << ','
       << format_real(s.log_posterior[t]) << '\n';
}

void write_samples_jsonl(std::ostream& os, const PosteriorSamples& s) {
  json header = {{"format", "dmbpp-samples"}, {"version", 1},       {"model", "dmbpp"},
                 {"N", s.dims.N},             {"m", s.dims.m},      {"p", s.dims.p}};
  os << header.dump() << '\n';
  for (std::size_t t = 0; t < s.states.size(); ++t) {
    const auto& st = s.states[t];
    json line = {{"iter", s.iterations[t]},
                 {"k", st.k},
                 {"gamma", {st.gammas.eta, st.gammas.z}},
                 {"weight_intercept", st.weights.intercept},
                 {"weight_slope", st.weights.slope},
                 {"atom_intercept", st.atoms.intercept},
                 {"atom_slope", st.atoms.slope},
                 {"allocations", st.allocations},
                 {"log_posterior", s.log_posterior[t]}};
    os << line.dump() << '\n';
  }
}

void write_samples_jsonl(std::ostream& os, const PdrSamples& s) {
  json header = {{"format", "dmbpp-samples"}, {"version", 1}, {"model", "pdr"},
                 {"variant", pdr_variant_name(s.variant)}, {"m", s.m}, {"p", s.p}};
  os << header.dump() << '\n';
  for (std::size_t t = 0; t < s.states.size(); ++t) {
    json line = {{"iter", s.iterations[t]}, {"beta", s.states[t].beta}, {"log_posterior", s.log_posterior[t]}};
    os << line.dump() << '\n';
  }
}

LoadedSamples read_samples_jsonl(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw IoError("sample file is empty");
  LoadedSamples out;
  try {
    const json header = json::parse(line);
    if (header.at("format") != "dmbpp-samples" || header.at("version") != 1)
      throw IoError("not a version 1 sample file");
    const std::string model = header.at("model");
    if (model == "dmbpp") {
      PosteriorSamples s;
      s.dims = {header.at("N").get<int>(), header.at("m").get<int>(), header.at("p").get<int>()};
      while (next_line(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        ModelState st;
        st.dims = s.dims;
        st.k = j.at("k");
        st.gammas = {j.at("gamma").at(0).get<int>(), j.at("gamma").at(1).get<int>()};
        st.weights.intercept = j.at("weight_intercept").get<std::vector<double>>();
        st.weights.slope = j.at("weight_slope").get<std::vector<double>>();
        st.atoms.intercept = j.at("atom_intercept").get<std::vector<double>>();
        st.atoms.slope = j.at("atom_slope").get<std::vector<double>>();
        st.allocations = j.at("allocations").get<std::vector<int>>();
        st.validate();
        s.iterations.push_back(j.at("iter"));
        s.log_posterior.push_back(j.at("log_posterior"));
        s.k_trace.push_back(st.k);
        s.gamma_trace.push_back(st.gammas);
        s.states.push_back(std::move(st));
      }
      out.dmbpp = std::move(s);
    } else if (model == "pdr") {
      PdrSamples s;
      s.m = header.at("m");
      s.p = header.at("p");
      s.variant = parse_pdr_variant(header.at("variant"));
      const std::size_t size = static_cast<std::size_t>(s.m + 1) * (s.p + 1);
      while (next_line(is, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        PdrState st = PdrState::zeros(s.m, s.p);
        st.beta = j.at("beta").get<std::vector<double>>();
        if (st.beta.size() != size) throw IoError("pdr draw has the wrong number of coefficients");
        s.iterations.push_back(j.at("iter"));
        s.log_posterior.push_back(j.at("log_posterior"));
        s.states.push_back(std::move(st));
      }
      out.pdr = std::move(s);
    } else {
      throw IoError("unknown model '" + model + "' in sample file");
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed sample file: ") + e.what());
  } catch (const DomainError& e) {
    throw IoError(std::string("invalid draw in sample file: ") + e.what());
  }
  return out;
}

LoadedSamples read_samples_jsonl(const fs::path& path) {
  std::istringstream is(read_text(path));
  return read_samples_jsonl(is);
}

void write_grid_csv(std::ostream& os, const DensityGrid& g) {
  const std::size_t p = g.x_grid.empty() ? 0 : g.x_grid.front().size();
  const std::size_t m = g.y_grid.points.empty() ? 0 : g.y_grid.points.front().dim();
  for (std::size_t r = 1; r <= p; ++r) os << 'x' << r << ',';
  for (std::size_t l = 1; l <= m; ++l) os << 'y' << l << ',';
  os << "density\n";
  for (std::size_t a = 0; a < g.rows(); ++a)
    for (std::size_t i = 0; i < g.cols(); ++i) {
      for (double v : g.x_grid[a]) os << format_real(v) << ',';
      for (double v : g.y_grid.points[i].coords()) os << format_real(v) << ',';
      os << format_real(g(a, i)) << '\n';
    }
}

DensityGrid read_grid_csv(std::istream& is, int m, int p) {
  std::string line;
  if (!next_line(is, line)) throw IoError("grid file is empty");
  const std::size_t width = static_cast<std::size_t>(m + p + 1);
  if (split_csv(line).size() != width) throw IoError("grid header has the wrong number of columns");
  DensityGrid g;
  std::map<std::vector<double>, std::size_t> x_index, y_index;
  struct Cell {
    std::size_t x, y;
    double v;
  };
  std::vector<Cell> cells;
  std::size_t row = 1;
  while (next_line(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != width) throw IoError("line " + std::to_string(row) + ": wrong column count");
    std::vector<double> x(p), y(m);
    for (int r = 0; r < p; ++r) x[r] = parse_real(c[r], row);
    for (int l = 0; l < m; ++l) y[l] = parse_real(c[p + l], row);
    auto [xi, xnew] = x_index.try_emplace(x, g.x_grid.size());
    if (xnew) g.x_grid.push_back(x);
    auto [yi, ynew] = y_index.try_emplace(y, g.y_grid.points.size());
    if (ynew) g.y_grid.points.emplace_back(y);
    cells.push_back({xi->second, yi->second, parse_real(c[p + m], row)});
  }
  if (cells.size() != g.rows() * g.cols()) throw IoError("grid file is not a full x by y product");
  g.values.assign(cells.size(), 0.0);
  for (const auto& c : cells) g(c.x, c.y) = c.v;
  return g;
}

DensityGrid read_grid_csv(const fs::path& path, int m, int p) {
  std::istringstream is(read_text(path));
  return read_grid_csv(is, m, p);
}

std::string metrics_json(const Metrics& m) {
  auto v = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  json j = {{"il1", v(m.il1)}, {"linf", v(m.linf)}, {"lpml", v(m.lpml)}, {"neg_n_waic", v(m.neg_n_waic)}};
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  if (model != "dmbpp" && model != "pdr") throw ConfigError("model must be 'dmbpp' or 'pdr'");
  prior.validate();
  chain.validate();
  pdr.validate();
  if (!(grid.spacing > 0.0 && grid.spacing < 0.5)) throw ConfigError("grid.spacing must lie in (0, 0.5)");
  if (grid.x_points < 1) throw ConfigError("grid.x_points must be >= 1");
}

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  T get(const std::string& key) {
    seen_.insert(key);
    const std::string full = path_.empty() ? key : path_ + "." + key;
    if (!obj_.contains(key)) throw ConfigError("missing config key " + full);
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else {
        if (!v.is_string()) throw ConfigError("");
      }
      return v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError("config key " + full + " has the wrong type");
    }
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    const std::string full = path_.empty() ? key : path_ + "." + key;
    if (!obj_.contains(key)) throw ConfigError("missing config key " + full);
    return Reader(obj_.at(key), full);
  }

  void finish() const {
    for (const auto& [k, _] : obj_.items())
      if (!seen_.count(k)) throw ConfigError("unknown config key " + (path_.empty() ? k : path_ + "." + k));
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(root, "");
  c.model = r.get<std::string>("model");
  {
    Reader p = r.child("prior");
    c.prior.lambda = p.get<double>("lambda");
    c.prior.sigma2_eta = p.get<double>("sigma2_eta");
    c.prior.sigma2_z = p.get<double>("sigma2_z");
    c.prior.tau1_eta = p.get<double>("tau1_eta");
    c.prior.tau2_eta = p.get<double>("tau2_eta");
    c.prior.tau1_z = p.get<double>("tau1_z");
    c.prior.tau2_z = p.get<double>("tau2_z");
    c.prior.t = p.get<double>("t");
    c.prior.N = p.get<int>("N");
    c.prior.k_max = p.get<int>("k_max");
    p.finish();
  }
  {
    Reader ch = r.child("chain");
    c.chain.n_iter = ch.get<int>("n_iter");
    c.chain.burn_in = ch.get<int>("burn_in");
    c.chain.thin = ch.get<int>("thin");
    c.chain.seed = ch.get<std::uint64_t>("seed");
    c.chain.slice_width = ch.get<double>("slice_width");
    c.chain.slice_max_steps = ch.get<int>("slice_max_steps");
    c.chain.k_proposal_halfwidth = ch.get<int>("k_proposal_halfwidth");
    c.chain.collapse_uninformed = ch.get<bool>("collapse_uninformed");
    c.chain.rescale_move = ch.get<bool>("rescale_move");
    ch.finish();
  }
  {
    Reader pd = r.child("pdr");
    c.pdr.sigma2 = pd.get<double>("sigma2");
    c.pdr.variant = parse_pdr_variant(pd.get<std::string>("variant"));
    pd.finish();
  }
  {
    Reader g = r.child("grid");
    c.grid.spacing = g.get<double>("spacing");
    c.grid.x_points = g.get<int>("x_points");
    g.finish();
  }
  r.finish();
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

std::string config_to_json(const RunConfig& c) {
  const auto& p = c.prior;
  const auto& ch = c.chain;
  json j = {{"model", c.model},
            {"prior",
             {{"lambda", p.lambda},
              {"sigma2_eta", p.sigma2_eta},
              {"sigma2_z", p.sigma2_z},
              {"tau1_eta", p.tau1_eta},
              {"tau2_eta", p.tau2_eta},
              {"tau1_z", p.tau1_z},
              {"tau2_z", p.tau2_z},
              {"t", p.t},
              {"N", p.N},
              {"k_max", p.k_max}}},
            {"chain",
             {{"n_iter", ch.n_iter},
              {"burn_in", ch.burn_in},
              {"thin", ch.thin},
              {"seed", ch.seed},
              {"slice_width", ch.slice_width},
              {"slice_max_steps", ch.slice_max_steps},
              {"k_proposal_halfwidth", ch.k_proposal_halfwidth},
              {"collapse_uninformed", ch.collapse_uninformed},
              {"rescale_move", ch.rescale_move}}},
            {"pdr", {{"sigma2", c.pdr.sigma2}, {"variant", pdr_variant_name(c.pdr.variant)}}},
            {"grid", {{"spacing", c.grid.spacing}, {"x_points", c.grid.x_points}}}};
  return j.dump(2) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw IoError("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

void write_manifest(const fs::path& dir, const Manifest& m) {
  json inputs = json::array(), outputs = json::array();
  for (const auto& p : m.inputs) inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  for (const auto& p : m.outputs)
    outputs.push_back({{"path", p.filename().string()}, {"sha256", sha256_file(p)}});
  json j = {{"command", m.command},
            {"config_digest", m.config_digest},
            {"seed", m.seed},
            {"inputs", inputs},
            {"outputs", outputs},
            {"version", DMBPP_VERSION},
            {"wall_clock_seconds", m.wall_clock_seconds}};
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace dmbpp
