#include "pdediscover/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pdediscover/grid_io.hpp"
#include "pdediscover/preprocess.hpp"
#include "pdediscover/term.hpp"

namespace pdediscover {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

// ---- config reading -------------------------------------------------------

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError(key + ": " + message);
}

void reject_unknown(const json& obj, const std::string& key, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) fail(key.empty() ? item.key() : key + "." + item.key(), "unknown key");
  }
}

const json& require_object(const json& doc, const std::string& key) {
  if (!doc.is_object()) fail(key, "must be an object");
  return doc;
}

double get_number(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(key, "must be finite");
  return d;
}

double get_positive(const json& v, const std::string& key) {
  const double d = get_number(v, key);
  if (!(d > 0.0)) fail(key, "must be positive");
  return d;
}

long long get_integer(const json& v, const std::string& key, long long min_value) {
  if (!v.is_number_integer()) fail(key, "must be an integer");
  const long long i = v.get<long long>();
  if (i < min_value) fail(key, "must be at least " + std::to_string(min_value));
  return i;
}

bool get_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) fail(key, "must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
  if (!v.is_string()) fail(key, "must be a string");
  return v.get<std::string>();
}

Interval get_interval(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) fail(key, "must be a [lo, hi] pair");
  Interval r{get_number(v[0], key + "[0]"), get_number(v[1], key + "[1]")};
  if (!(r.hi > r.lo)) fail(key, "needs hi > lo");
  return r;
}

DerivativeSpec get_method(const json& v, const std::string& key, Axis axis) {
  require_object(v, key);
  reject_unknown(v, key, {"method", "degree", "window"});
  DerivativeSpec spec = DerivativeSpec::fd(axis, 1);
  const std::string method = v.contains("method") ? get_string(v["method"], key + ".method") : "fd";
  if (method == "fd") {
    if (v.contains("degree") || v.contains("window")) fail(key, "degree/window apply only to method polynomial");
  } else if (method == "polynomial") {
    spec.method = DiffMethod::polynomial;
    if (v.contains("degree")) spec.poly_degree = static_cast<int>(get_integer(v["degree"], key + ".degree", 1));
    if (v.contains("window")) spec.window = static_cast<int>(get_integer(v["window"], key + ".window", 3));
    if (spec.window % 2 == 0) fail(key + ".window", "must be odd");
    if (spec.window < spec.poly_degree + 1) fail(key + ".window", "must be at least degree + 1");
  } else {
    fail(key + ".method", "must be \"fd\" or \"polynomial\"");
  }
  return spec;
}

json method_to_json(const DerivativeSpec& s) {
  if (s.method == DiffMethod::central_fd) return {{"method", "fd"}};
  return {{"method", "polynomial"}, {"degree", s.poly_degree}, {"window", s.window}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string canonical_name(const std::string& name) {
  try {
    return parse_term(name).name();
  } catch (const ParseError&) {
    return name;
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

// ---- config -----------------------------------------------------------------

DiscoveryConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "config");
  reject_unknown(doc, "", {"format_version", "input", "dictionary", "preprocess", "solver", "output_path"});
  if (!doc.contains("format_version")) fail("format_version", "missing");
  if (get_integer(doc["format_version"], "format_version", 1) != kFormatVersion) {
    fail("format_version", "unsupported version (expected 1)");
  }
  DiscoveryConfig cfg;
  cfg.base_dir = base_dir;

  // preprocess first: the complex flag decides the input form
  if (doc.contains("preprocess")) {
    const json& p = require_object(doc["preprocess"], "preprocess");
    reject_unknown(p, "preprocess",
                   {"noise_level", "seed", "pod_threshold", "subsample_count", "svd_rank", "complex"});
    if (p.contains("noise_level")) {
      const double level = get_number(p["noise_level"], "preprocess.noise_level");
      if (level < 0.0) fail("preprocess.noise_level", "must be nonnegative");
      cfg.preprocess.noise_level = level;
    }
    if (p.contains("seed")) {
      cfg.preprocess.seed = static_cast<std::uint64_t>(get_integer(p["seed"], "preprocess.seed", 0));
    }
    if (p.contains("pod_threshold")) {
      const double th = get_number(p["pod_threshold"], "preprocess.pod_threshold");
      if (!(th > 0.0 && th <= 1.0)) fail("preprocess.pod_threshold", "must lie in (0, 1]");
      cfg.preprocess.pod_threshold = th;
    }
    if (p.contains("subsample_count")) {
      cfg.preprocess.subsample_count = get_integer(p["subsample_count"], "preprocess.subsample_count", 1);
    }
    if (p.contains("svd_rank")) {
      cfg.preprocess.svd_reduce = true;
      const json& r = p["svd_rank"];
      if (r.is_string()) {
        if (r.get<std::string>() != "full") fail("preprocess.svd_rank", "must be \"full\" or a positive integer");
      } else {
        cfg.preprocess.svd_rank = get_integer(r, "preprocess.svd_rank", 1);
      }
    }
    if (p.contains("complex")) cfg.preprocess.complex = get_bool(p["complex"], "preprocess.complex");
  }

  if (!doc.contains("input")) fail("input", "missing");
  const json& in = doc["input"];
  if (!in.is_array() || in.empty()) fail("input", "must be a non-empty list");
  for (std::size_t k = 0; k < in.size(); ++k) {
    const std::string key = "input[" + std::to_string(k) + "]";
    FieldInput field;
    if (in[k].is_string()) {
      field.path = in[k].get<std::string>();
    } else if (in[k].is_object()) {
      reject_unknown(in[k], key, {"path", "re", "im", "name"});
      if (in[k].contains("path")) field.path = get_string(in[k]["path"], key + ".path");
      if (in[k].contains("re")) {
        if (in[k].contains("path")) fail(key, "give either path or re/im, not both");
        field.path = get_string(in[k]["re"], key + ".re");
      }
      if (in[k].contains("im")) field.imag_path = get_string(in[k]["im"], key + ".im");
      if (in[k].contains("name")) field.name = get_string(in[k]["name"], key + ".name");
    } else {
      fail(key, "must be a path or an object");
    }
    if (field.path.empty()) fail(key, "missing grid path");
    if (cfg.preprocess.complex && !field.imag_path) fail(key, "complex inputs need both re and im");
    if (!cfg.preprocess.complex && field.imag_path) fail(key, "im given but preprocess.complex is false");
    cfg.input.push_back(std::move(field));
  }

  if (doc.contains("dictionary")) {
    const json& d = require_object(doc["dictionary"], "dictionary");
    reject_unknown(d, "dictionary",
                   {"max_derivative_order", "max_power", "include_constant", "extra_terms", "output",
                    "space_method", "time_method", "sample_region"});
    DictionarySpec& spec = cfg.dictionary;
    if (d.contains("max_derivative_order")) {
      spec.max_derivative_order =
          static_cast<int>(get_integer(d["max_derivative_order"], "dictionary.max_derivative_order", 0));
      if (spec.max_derivative_order > 4) fail("dictionary.max_derivative_order", "must be at most 4");
    }
    if (d.contains("max_power")) {
      spec.max_power = static_cast<int>(get_integer(d["max_power"], "dictionary.max_power", 0));
      if (spec.max_power > 4) fail("dictionary.max_power", "must be at most 4");
    }
    if (d.contains("include_constant")) {
      spec.include_constant = get_bool(d["include_constant"], "dictionary.include_constant");
    }
    if (d.contains("extra_terms")) {
      const json& e = d["extra_terms"];
      if (!e.is_array()) fail("dictionary.extra_terms", "must be a list of term expressions");
      for (std::size_t k = 0; k < e.size(); ++k) {
        const std::string key = "dictionary.extra_terms[" + std::to_string(k) + "]";
        const std::string expr = get_string(e[k], key);
        try {
          parse_term(expr);
        } catch (const ParseError& err) {
          fail(key, err.what());
        }
        spec.extra_terms.push_back(expr);
      }
    }
    if (d.contains("output")) {
      spec.output = get_string(d["output"], "dictionary.output");
      try {
        parse_output(spec.output);
      } catch (const ParseError& err) {
        fail("dictionary.output", err.what());
      }
    }
    if (d.contains("space_method")) {
      spec.space_method = get_method(d["space_method"], "dictionary.space_method", Axis::space);
    }
    if (d.contains("time_method")) {
      spec.time_method = get_method(d["time_method"], "dictionary.time_method", Axis::time);
    }
    if (d.contains("sample_region")) {
      const json& r = require_object(d["sample_region"], "dictionary.sample_region");
      reject_unknown(r, "dictionary.sample_region", {"x", "t"});
      if (r.contains("x")) cfg.sample_x = get_interval(r["x"], "dictionary.sample_region.x");
      if (r.contains("t")) cfg.sample_t = get_interval(r["t"], "dictionary.sample_region.t");
    }
    if (!spec.include_constant && spec.extra_terms.empty() &&
        (spec.max_power == 0 && spec.max_derivative_order == 0)) {
      fail("dictionary", "empty dictionary");
    }
  }

  if (doc.contains("solver")) {
    const json& s = require_object(doc["solver"], "solver");
    reject_unknown(s, "solver",
                   {"sigma2", "lambda", "tau", "max_outer", "inner_tol", "max_inner", "prune_threshold",
                    "normalize_columns", "refit_ols", "seed"});
    SBLConfig& sc = cfg.solver;
    if (s.contains("sigma2")) {
      if (s["sigma2"].is_string()) {
        if (s["sigma2"].get<std::string>() != "auto") fail("solver.sigma2", "must be positive or \"auto\"");
      } else {
        sc.sigma2 = get_positive(s["sigma2"], "solver.sigma2");
      }
    }
    if (s.contains("lambda")) sc.lambda = get_positive(s["lambda"], "solver.lambda");
    if (s.contains("tau")) sc.tau = get_positive(s["tau"], "solver.tau");
    if (s.contains("max_outer")) sc.max_outer = static_cast<int>(get_integer(s["max_outer"], "solver.max_outer", 1));
    if (s.contains("inner_tol")) sc.inner_tol = get_positive(s["inner_tol"], "solver.inner_tol");
    if (s.contains("max_inner")) sc.max_inner = static_cast<int>(get_integer(s["max_inner"], "solver.max_inner", 1));
    if (s.contains("prune_threshold")) {
      sc.prune_threshold = get_number(s["prune_threshold"], "solver.prune_threshold");
      if (sc.prune_threshold < 0.0) fail("solver.prune_threshold", "must be nonnegative");
    }
    if (s.contains("normalize_columns")) {
      sc.normalize_columns = get_bool(s["normalize_columns"], "solver.normalize_columns");
    }
    if (s.contains("refit_ols")) sc.refit_ols = get_bool(s["refit_ols"], "solver.refit_ols");
    if (s.contains("seed")) sc.seed = static_cast<std::uint64_t>(get_integer(s["seed"], "solver.seed", 0));
  }

  if (doc.contains("output_path")) cfg.output_path = get_string(doc["output_path"], "output_path");
  return cfg;
}

json config_to_json(const DiscoveryConfig& cfg) {
  json input = json::array();
  for (const auto& f : cfg.input) {
    json item;
    if (f.imag_path) {
      item["re"] = f.path.generic_string();
      item["im"] = f.imag_path->generic_string();
    } else {
      item["path"] = f.path.generic_string();
    }
    if (f.name) item["name"] = *f.name;
    input.push_back(item);
  }
  const DictionarySpec& d = cfg.dictionary;
  json dict = {{"max_derivative_order", d.max_derivative_order},
               {"max_power", d.max_power},
               {"include_constant", d.include_constant},
               {"extra_terms", d.extra_terms},
               {"output", d.output},
               {"space_method", method_to_json(d.space_method)},
               {"time_method", method_to_json(d.time_method)}};
  if (cfg.sample_x || cfg.sample_t) {
    json region = json::object();
    if (cfg.sample_x) region["x"] = {cfg.sample_x->lo, cfg.sample_x->hi};
    if (cfg.sample_t) region["t"] = {cfg.sample_t->lo, cfg.sample_t->hi};
    dict["sample_region"] = region;
  }
  const PreprocessConfig& p = cfg.preprocess;
  json pre = {{"seed", p.seed}, {"complex", p.complex}};
  if (p.noise_level) pre["noise_level"] = *p.noise_level;
  if (p.pod_threshold) pre["pod_threshold"] = *p.pod_threshold;
  if (p.subsample_count) pre["subsample_count"] = *p.subsample_count;
  if (p.svd_reduce) pre["svd_rank"] = p.svd_rank ? json(*p.svd_rank) : json("full");
  const SBLConfig& s = cfg.solver;
  json solver = {{"sigma2", s.sigma2 ? json(*s.sigma2) : json("auto")},
                 {"lambda", s.lambda},
                 {"tau", s.tau},
                 {"max_outer", s.max_outer},
                 {"inner_tol", s.inner_tol},
                 {"max_inner", s.max_inner},
                 {"prune_threshold", s.prune_threshold},
                 {"normalize_columns", s.normalize_columns},
                 {"refit_ols", s.refit_ols},
                 {"seed", s.seed}};
  json out = {{"format_version", kFormatVersion},
              {"input", input},
              {"dictionary", dict},
              {"preprocess", pre},
              {"solver", solver}};
  if (!cfg.output_path.empty()) out["output_path"] = cfg.output_path.generic_string();
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

DiscoveryConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

// ---- data loading and preparation ------------------------------------------

FieldData load_fields(const DiscoveryConfig& cfg) {
  FieldData data;
  if (cfg.preprocess.complex) data.imag.emplace();
  for (const auto& f : cfg.input) {
    SnapshotGrid re = read_grid(resolve(cfg.base_dir, f.path));
    const std::string name = f.name.value_or(re.field_name());
    data.real.add(re.renamed(name));
    if (f.imag_path) {
      SnapshotGrid im = read_grid(resolve(cfg.base_dir, *f.imag_path));
      if (!im.same_layout(re)) throw GridError("real and imaginary grids of '" + name + "' differ in layout");
      data.imag->add(im.renamed(name));
    }
  }
  return data;
}

PreparedSystem prepare_system(const DiscoveryConfig& cfg, const FieldData& fields) {
  const PreprocessConfig& pre = cfg.preprocess;
  if (pre.complex != fields.imag.has_value()) {
    throw ConfigError("preprocess.complex: does not match the loaded fields");
  }

  std::uint32_t stream = 0;
  auto condition = [&](const SnapshotGrid& g) {
    SnapshotGrid out = g;
    if (pre.noise_level && *pre.noise_level > 0.0) out = add_noise(out, *pre.noise_level, derive_seed(pre.seed, stream));
    ++stream;
    if (pre.pod_threshold) out = pod_denoise(out, *pre.pod_threshold).first;
    return out;
  };
  FieldSet real;
  std::optional<FieldSet> imag;
  if (fields.imag) imag.emplace();
  for (const auto& name : fields.real.names()) {
    real.add(condition(fields.real.at(name)));
    if (imag) imag->add(condition(fields.imag->at(name)));
  }

  std::optional<SampleMask> mask;
  if (cfg.sample_x || cfg.sample_t) {
    const SnapshotGrid& ref = real.fields().front();
    const Interval xr = cfg.sample_x.value_or(Interval{ref.x(0), ref.x(ref.nx() - 1)});
    const Interval tr = cfg.sample_t.value_or(Interval{ref.t(0), ref.t(ref.nt() - 1)});
    mask = region_mask(ref, xr, tr);
  }
  const std::uint64_t sample_seed = derive_seed(pre.seed, 1000);

  PreparedSystem prepared;
  prepared.complex = pre.complex;
  if (pre.complex) {
    ComplexSystem sys = build_complex(real, *imag, cfg.dictionary, mask);
    if (pre.subsample_count) {
      if (*pre.subsample_count > sys.phi_c.rows()) {
        throw ConfigError("preprocess.subsample_count: exceeds the " + std::to_string(sys.phi_c.rows()) +
                          " available samples");
      }
      sys = subsample(sys, *pre.subsample_count, sample_seed);
    }
    prepared.term_names = sys.column_names;
    prepared.output_name = sys.output_name;
    prepared.fit = complex_to_real(sys);
  } else {
    Dictionary dict = build(real, cfg.dictionary, mask);
    if (pre.subsample_count) {
      if (*pre.subsample_count > dict.rows()) {
        throw ConfigError("preprocess.subsample_count: exceeds the " + std::to_string(dict.rows()) +
                          " available samples");
      }
      dict = subsample(dict, *pre.subsample_count, sample_seed);
    }
    prepared.term_names = dict.column_names;
    prepared.output_name = dict.output_name;
    prepared.fit = std::move(dict);
  }
  if (pre.svd_reduce) {
    if (pre.svd_rank && *pre.svd_rank > std::min(prepared.fit.rows(), prepared.fit.cols())) {
      throw ConfigError("preprocess.svd_rank: exceeds min(rows, columns) of the dictionary");
    }
    prepared.solve = svd_reduce(prepared.fit, pre.svd_rank);
  } else {
    prepared.solve = prepared.fit;
  }
  return prepared;
}

// ---- solving and reporting --------------------------------------------------

DiscoveredPDE solve_prepared(const PreparedSystem& sys, const SBLConfig& solver) {
  SBLConfig cfg = solver;
  if (!cfg.sigma2 && sys.solve.rows() != sys.fit.rows()) {
    // A reduced system has too few rows for a residual estimate; use the full one.
    cfg.sigma2 = auto_noise_variance(sys.fit.phi, sys.fit.y);
  }
  const SBLResult r = run_sbl(sys.solve, cfg);

  DiscoveredPDE pde;
  pde.output_name = sys.output_name;
  pde.complex = sys.complex;
  const VectorXd residual = sys.fit.y - sys.fit.phi * r.theta;
  const double norm_y = sys.fit.y.squaredNorm();
  pde.fit_error = norm_y > 0.0 ? residual.squaredNorm() / norm_y : 0.0;

  std::vector<std::complex<double>> coefs;
  if (sys.complex) {
    const Eigen::VectorXcd c = real_to_complex(r.theta);
    for (Index j = 0; j < c.size(); ++j) coefs.push_back(c(j));
  } else {
    for (Index j = 0; j < r.theta.size(); ++j) coefs.push_back(r.theta(j));
  }
  for (std::size_t j = 0; j < coefs.size(); ++j) {
    if (coefs[j] != 0.0) pde.terms.push_back({sys.term_names[j], coefs[j]});
  }
  std::stable_sort(pde.terms.begin(), pde.terms.end(), [](const ReportTerm& a, const ReportTerm& b) {
    return std::abs(a.coefficient) > std::abs(b.coefficient);
  });
  pde.support_size = static_cast<int>(pde.terms.size());
  pde.solver.iterations = r.outer_iterations;
  pde.solver.converged = r.converged;
  pde.solver.kkt_residual = r.kkt_residual;
  pde.solver.kkt_tolerance = r.kkt_tolerance;
  pde.solver.sigma2 = r.sigma2;
  pde.solver.lambda = r.lambda;
  pde.solver.cost_trace = r.cost_trace;
  return pde;
}

DiscoveredPDE discover(const DiscoveryConfig& cfg, const FieldData& fields) {
  return solve_prepared(prepare_system(cfg, fields), cfg.solver);
}

DiscoveredPDE discover(const DiscoveryConfig& cfg) { return discover(cfg, load_fields(cfg)); }

std::string DiscoveredPDE::equation() const {
  std::string out = output_name + " =";
  if (terms.empty()) return out + " 0";
  bool first = true;
  for (const auto& t : terms) {
    const std::string label = t.name == "1" ? "" : " " + t.name;
    if (complex) {
      out += (first ? " " : " + ") + std::string("(") + format_number(t.coefficient.real()) +
             (t.coefficient.imag() < 0 ? " - " : " + ") + format_number(std::abs(t.coefficient.imag())) + "i)" +
             label;
    } else {
      const double v = t.coefficient.real();
      if (first) {
        out += " " + format_number(v);
      } else {
        out += (v < 0 ? " - " : " + ") + format_number(std::abs(v));
      }
      out += label;
    }
    first = false;
  }
  return out;
}

json report_to_json(const DiscoveredPDE& pde, const DiscoveryConfig* config) {
  json terms = json::array();
  for (const auto& t : pde.terms) {
    json item = {{"name", t.name}, {"re", t.coefficient.real()}};
    if (pde.complex) item["im"] = t.coefficient.imag();
    terms.push_back(item);
  }
  json doc = {{"format_version", kFormatVersion},
              {"output_name", pde.output_name},
              {"equation", pde.equation()},
              {"complex", pde.complex},
              {"terms", terms},
              {"fit_error", pde.fit_error},
              {"support_size", pde.support_size},
              {"solver",
               {{"iterations", pde.solver.iterations},
                {"converged", pde.solver.converged},
                {"kkt_residual", pde.solver.kkt_residual},
                {"kkt_tolerance", pde.solver.kkt_tolerance},
                {"sigma2", pde.solver.sigma2},
                {"lambda", pde.solver.lambda},
                {"cost_trace", pde.solver.cost_trace}}}};
  if (config) doc["config"] = config_to_json(*config);
  return doc;
}

DiscoveredPDE report_from_json(const json& doc) {
  require_object(doc, "report");
  if (!doc.contains("format_version") || get_integer(doc["format_version"], "format_version", 1) != kFormatVersion) {
    fail("format_version", "missing or unsupported");
  }
  DiscoveredPDE pde;
  if (doc.contains("output_name")) pde.output_name = get_string(doc["output_name"], "output_name");
  if (doc.contains("complex")) pde.complex = get_bool(doc["complex"], "complex");
  if (!doc.contains("terms") || !doc["terms"].is_array()) fail("terms", "must be a list");
  for (std::size_t k = 0; k < doc["terms"].size(); ++k) {
    const json& t = doc["terms"][k];
    const std::string key = "terms[" + std::to_string(k) + "]";
    require_object(t, key);
    ReportTerm term;
    if (!t.contains("name")) fail(key + ".name", "missing");
    term.name = get_string(t["name"], key + ".name");
    const double re = t.contains("re") ? get_number(t["re"], key + ".re") : 0.0;
    const double im = t.contains("im") ? get_number(t["im"], key + ".im") : 0.0;
    term.coefficient = {re, im};
    pde.terms.push_back(term);
  }
  if (doc.contains("fit_error")) pde.fit_error = get_number(doc["fit_error"], "fit_error");
  pde.support_size = doc.contains("support_size")
                         ? static_cast<int>(get_integer(doc["support_size"], "support_size", 0))
                         : static_cast<int>(pde.terms.size());
  if (doc.contains("solver") && doc["solver"].is_object()) {
    const json& s = doc["solver"];
    if (s.contains("iterations")) pde.solver.iterations = s["iterations"].get<int>();
    if (s.contains("converged")) pde.solver.converged = s["converged"].get<bool>();
    if (s.contains("kkt_residual") && s["kkt_residual"].is_number()) pde.solver.kkt_residual = s["kkt_residual"].get<double>();
    if (s.contains("kkt_tolerance") && s["kkt_tolerance"].is_number()) pde.solver.kkt_tolerance = s["kkt_tolerance"].get<double>();
    if (s.contains("sigma2") && s["sigma2"].is_number()) pde.solver.sigma2 = s["sigma2"].get<double>();
    if (s.contains("lambda") && s["lambda"].is_number()) pde.solver.lambda = s["lambda"].get<double>();
    if (s.contains("cost_trace") && s["cost_trace"].is_array()) {
      for (const auto& v : s["cost_trace"]) pde.solver.cost_trace.push_back(v.is_number() ? v.get<double>() : NAN);
    }
  }
  return pde;
}

std::vector<TermCoefficient> truth_from_json(const json& doc) {
  require_object(doc, "truth");
  if (!doc.contains("terms") || !doc["terms"].is_array()) fail("terms", "must be a list");
  std::vector<TermCoefficient> out;
  for (std::size_t k = 0; k < doc["terms"].size(); ++k) {
    const json& t = doc["terms"][k];
    const std::string key = "terms[" + std::to_string(k) + "]";
    require_object(t, key);
    if (!t.contains("name")) fail(key + ".name", "missing");
    const std::string name = get_string(t["name"], key + ".name");
    try {
      parse_term(name);
    } catch (const ParseError& e) {
      fail(key + ".name", e.what());
    }
    const double re = t.contains("re") ? get_number(t["re"], key + ".re") : 0.0;
    const double im = t.contains("im") ? get_number(t["im"], key + ".im") : 0.0;
    if (re == 0.0 && im == 0.0) fail(key, "true coefficient must be nonzero");
    out.push_back({name, {re, im}});
  }
  return out;
}

Evaluation evaluate(const DiscoveredPDE& report, const std::vector<TermCoefficient>& truth) {
  std::vector<TermCoefficient> estimated;
  for (const auto& t : report.terms) estimated.push_back({canonical_name(t.name), t.coefficient});
  std::vector<TermCoefficient> expected;
  for (const auto& t : truth) expected.push_back({canonical_name(t.name), t.value});
  Evaluation ev;
  ev.error = coeff_error(estimated, expected);
  ev.fit_error = report.fit_error;
  return ev;
}

std::string format_evaluation(const Evaluation& ev) {
  char line[160];
  std::snprintf(line, sizeof line, "support: %s; mean %.4f%%; std %.4f%%\n", ev.exact_support() ? "exact" : "mismatch",
                100.0 * ev.error.mean, 100.0 * ev.error.std);
  std::string out = line;
  out += "missing: " + std::to_string(ev.error.missing) + "\n";
  out += "spurious: " + std::to_string(ev.error.spurious) + "\n";
  std::snprintf(line, sizeof line, "fit_error: %.6e\n", ev.fit_error);
  out += line;
  return out;
}

std::vector<SweepRow> sweep(const DiscoveryConfig& cfg, const FieldData& fields, std::vector<double> lambdas) {
  if (lambdas.size() < 2) throw ConfigError("lambda: a sweep needs at least two values");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda: values must be positive");
  }
  std::sort(lambdas.begin(), lambdas.end());
  const PreparedSystem sys = prepare_system(cfg, fields);
  std::vector<SweepRow> rows;
  for (double l : lambdas) {
    SBLConfig solver = cfg.solver;
    solver.lambda = l;
    const DiscoveredPDE pde = solve_prepared(sys, solver);
    SweepRow row;
    row.lambda = l;
    row.support_size = pde.support_size;
    row.fit_error = pde.fit_error;
    row.converged = pde.solver.converged;
    for (const auto& t : pde.terms) row.terms.push_back(t.name);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::string out = "lambda,support_size,fit_error,converged,terms\n";
  for (const auto& r : rows) {
    std::string names;
    for (const auto& t : r.terms) names += (names.empty() ? "" : ";") + t;
    out += format_double(r.lambda) + "," + std::to_string(r.support_size) + "," + format_double(r.fit_error) + "," +
           (r.converged ? "true" : "false") + "," + names + "\n";
  }
  return out;
}

}  // namespace pdediscover
