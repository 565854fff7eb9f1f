#include "pdediscover/dictionary.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <random>
#include <set>
#include <tuple>

namespace pdediscover {

namespace {

using Complex = std::complex<double>;

void check_spec(const DictionarySpec& spec) {
  if (spec.max_derivative_order < 0 || spec.max_derivative_order > 4) {
    throw DictionaryError("max_derivative_order must be in 0..4");
  }
  if (spec.max_power < 0 || spec.max_power > 4) {
    throw DictionaryError("max_power must be in 0..4");
  }
}

DerivativeSpec space_spec(const DictionarySpec& spec, int order) {
  DerivativeSpec s = spec.space_method;
  s.axis = Axis::space;
  s.order = order;
  return s;
}

DerivativeSpec time_spec(const DictionarySpec& spec, int order) {
  DerivativeSpec s = spec.time_method;
  s.axis = Axis::time;
  s.order = order;
  return s;
}

// Memo of derivative grids keyed by (field, axis, order); method settings are
// fixed per build so they need not be part of the key.
class DerivativeCache {
public:
  DerivativeCache(const FieldSet& fields, bool memoize) : fields_(fields), memoize_(memoize) {}

  DerivativeResult get(const std::string& field, const DerivativeSpec& spec) {
    if (!memoize_) return differentiate(fields_.at(field), spec);
    const auto key = std::make_tuple(field, spec.axis, spec.order);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, differentiate(fields_.at(field), spec)).first;
    }
    return it->second;
  }

private:
  const FieldSet& fields_;
  bool memoize_;
  std::map<std::tuple<std::string, Axis, int>, DerivativeResult> cache_;
};

struct Layout {
  OutputTerm output;
  std::vector<CandidateTerm> terms;
  std::vector<std::string> names;
  std::vector<SampleCoord> coords;
};

// Resolves terms and the retained cells; shared by the real and complex builders.
Layout plan(const FieldSet& fields, const DictionarySpec& spec, const std::optional<SampleMask>& mask) {
  check_spec(spec);
  if (fields.empty()) throw DictionaryError("no input fields");
  const auto known = fields.names();
  Layout layout;
  layout.output = parse_output(spec.output, known);
  layout.terms = enumerate_terms(spec, known);
  if (layout.terms.empty()) throw DictionaryError("empty dictionary");
  for (const auto& t : layout.terms) layout.names.push_back(t.name());

  Eigen::Index trim_x = 0;
  for (const auto& t : layout.terms) {
    for (const auto& f : t.factors()) {
      if (f.derivative > 0) trim_x = std::max(trim_x, boundary_trim(space_spec(spec, f.derivative)));
    }
  }
  const Eigen::Index trim_t = boundary_trim(time_spec(spec, layout.output.time_order));

  const SnapshotGrid& ref = fields.fields().front();
  if (mask && (mask->rows() != ref.nx() || mask->cols() != ref.nt())) {
    throw DictionaryError("sample mask shape does not match the grid");
  }
  for (Eigen::Index i = trim_t; i < ref.nt() - trim_t; ++i) {
    for (Eigen::Index j = trim_x; j < ref.nx() - trim_x; ++j) {
      if (!mask || (*mask)(j, i)) layout.coords.push_back({j, i});
    }
  }
  if (layout.coords.empty()) throw DictionaryError("empty sample set after trimming and masking");
  return layout;
}

Eigen::VectorXd gather(const Eigen::MatrixXd& grid, const std::vector<SampleCoord>& coords) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t r = 0; r < coords.size(); ++r) {
    out(static_cast<Eigen::Index>(r)) = grid(coords[r].x_index, coords[r].t_index);
  }
  return out;
}

bool column_is_zero(const auto& col) { return (col.array() == 0.0).all(); }

}  // namespace

SampleMask region_mask(const SnapshotGrid& layout, Interval x_range, Interval t_range) {
  SampleMask mask = SampleMask::Constant(layout.nx(), layout.nt(), false);
  auto [j0, j1] = index_span(layout.x0(), layout.dx(), layout.nx(), x_range);
  auto [i0, i1] = index_span(layout.t0(), layout.dt(), layout.nt(), t_range);
  if (j1 > j0 && i1 > i0) mask.block(j0, i0, j1 - j0, i1 - i0) = true;
  return mask;
}

std::vector<CandidateTerm> enumerate_terms(const DictionarySpec& spec,
                                           const std::vector<std::string>& known_fields) {
  check_spec(spec);
  const std::string field = parse_output(spec.output, known_fields).field;
  std::vector<CandidateTerm> terms;
  std::set<std::string> seen;
  auto push = [&](CandidateTerm t) {
    if (seen.insert(t.name()).second) terms.push_back(std::move(t));
  };

  if (spec.include_constant) push(CandidateTerm{});
  for (int a = 1; a <= spec.max_power; ++a) {
    push(CandidateTerm({Factor{field, Wrapper::none, 0, a}}));
  }
  for (int a = 0; a <= spec.max_power; ++a) {
    for (int b = 1; b <= spec.max_derivative_order; ++b) {
      std::vector<Factor> f;
      if (a > 0) f.push_back({field, Wrapper::none, 0, a});
      f.push_back({field, Wrapper::none, b, 1});
      push(CandidateTerm(std::move(f)));
    }
  }
  for (const auto& expr : spec.extra_terms) push(parse_term(expr, known_fields));
  return terms;
}

Dictionary build(const FieldSet& fields, const DictionarySpec& spec,
                 const std::optional<SampleMask>& mask, BuildOptions options) {
  Layout layout = plan(fields, spec, mask);
  DerivativeCache cache(fields, options.memoize_derivatives);
  const auto rows = static_cast<Eigen::Index>(layout.coords.size());

  // sampled factor vectors, keyed by (field, spatial order)
  std::map<std::pair<std::string, int>, Eigen::VectorXd> samples;
  FactorLookup<double> lookup = [&](const std::string& field, int order) -> const Eigen::VectorXd& {
    const auto key = std::make_pair(field, order);
    auto it = samples.find(key);
    if (it == samples.end() || !options.memoize_derivatives) {
      Eigen::VectorXd v = order == 0 ? gather(fields.at(field).values(), layout.coords)
                                     : gather(cache.get(field, space_spec(spec, order)).grid.values(),
                                              layout.coords);
      it = samples.insert_or_assign(key, std::move(v)).first;
    }
    return it->second;
  };

  Dictionary dict;
  dict.phi.resize(rows, static_cast<Eigen::Index>(layout.terms.size()));
  for (std::size_t c = 0; c < layout.terms.size(); ++c) {
    dict.phi.col(static_cast<Eigen::Index>(c)) = evaluate_term(layout.terms[c], rows, lookup);
  }
  const auto& out_grid =
      cache.get(layout.output.field, time_spec(spec, layout.output.time_order)).grid;
  dict.y = gather(out_grid.values(), layout.coords);
  dict.column_names = std::move(layout.names);
  dict.output_name = layout.output.name();
  dict.sample_coords = std::move(layout.coords);
  check_nonzero_columns(dict.phi, dict.column_names);
  return dict;
}

ComplexSystem build_complex(const FieldSet& real_parts, const FieldSet& imag_parts,
                            const DictionarySpec& spec, const std::optional<SampleMask>& mask) {
  if (real_parts.names() != imag_parts.names()) {
    throw DictionaryError("real and imaginary field sets must name the same fields");
  }
  if (!real_parts.empty() && !real_parts.fields().front().same_layout(imag_parts.fields().front())) {
    throw DictionaryError("real and imaginary parts must share a layout");
  }
  Layout layout = plan(real_parts, spec, mask);
  DerivativeCache re_cache(real_parts, true);
  DerivativeCache im_cache(imag_parts, true);
  const auto rows = static_cast<Eigen::Index>(layout.coords.size());

  auto complex_samples = [&](const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
    Eigen::VectorXcd v(rows);
    v.real() = gather(re, layout.coords);
    v.imag() = gather(im, layout.coords);
    return v;
  };

  std::map<std::pair<std::string, int>, Eigen::VectorXcd> samples;
  FactorLookup<Complex> lookup = [&](const std::string& field, int order) -> const Eigen::VectorXcd& {
    const auto key = std::make_pair(field, order);
    auto it = samples.find(key);
    if (it == samples.end()) {
      Eigen::VectorXcd v =
          order == 0 ? complex_samples(real_parts.at(field).values(), imag_parts.at(field).values())
                     : complex_samples(re_cache.get(field, space_spec(spec, order)).grid.values(),
                                       im_cache.get(field, space_spec(spec, order)).grid.values());
      it = samples.emplace(key, std::move(v)).first;
    }
    return it->second;
  };

  ComplexSystem sys;
  sys.phi_c.resize(rows, static_cast<Eigen::Index>(layout.terms.size()));
  for (std::size_t c = 0; c < layout.terms.size(); ++c) {
    sys.phi_c.col(static_cast<Eigen::Index>(c)) = evaluate_term(layout.terms[c], rows, lookup);
  }
  const auto out_spec = time_spec(spec, layout.output.time_order);
  sys.y_c = complex_samples(re_cache.get(layout.output.field, out_spec).grid.values(),
                            im_cache.get(layout.output.field, out_spec).grid.values());
  sys.column_names = std::move(layout.names);
  sys.output_name = layout.output.name();
  sys.sample_coords = std::move(layout.coords);
  for (Eigen::Index c = 0; c < sys.phi_c.cols(); ++c) {
    if ((sys.phi_c.col(c).array() == Complex(0.0, 0.0)).all()) {
      throw DictionaryError("column '" + sys.column_names[static_cast<std::size_t>(c)] +
                            "' is identically zero");
    }
  }
  return sys;
}

void check_nonzero_columns(const Eigen::MatrixXd& phi, const std::vector<std::string>& names) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    if (column_is_zero(phi.col(c))) {
      const auto idx = static_cast<std::size_t>(c);
      throw DictionaryError("column '" + (idx < names.size() ? names[idx] : std::to_string(c)) +
                            "' is identically zero on the sampled cells");
    }
  }
}

std::vector<Eigen::Index> sample_rows(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
  if (count < 1 || count > n) {
    throw DictionaryError("subsample count " + std::to_string(count) + " outside 1.." +
                          std::to_string(n));
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) idx[static_cast<std::size_t>(r)] = r;
  std::mt19937_64 rng(seed);
  for (Eigen::Index r = 0; r < count; ++r) {
    std::uniform_int_distribution<Eigen::Index> pick(r, n - 1);
    std::swap(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

Dictionary subsample(const Dictionary& dict, Eigen::Index count, std::uint64_t seed) {
  const auto rows = sample_rows(dict.rows(), count, seed);
  Dictionary out;
  out.phi.resize(count, dict.cols());
  out.y.resize(count);
  out.sample_coords.reserve(rows.size());
  for (Eigen::Index r = 0; r < count; ++r) {
    const auto src = rows[static_cast<std::size_t>(r)];
    out.phi.row(r) = dict.phi.row(src);
    out.y(r) = dict.y(src);
    if (!dict.sample_coords.empty()) out.sample_coords.push_back(dict.sample_coords[static_cast<std::size_t>(src)]);
  }
  out.column_names = dict.column_names;
  out.output_name = dict.output_name;
  check_nonzero_columns(out.phi, out.column_names);
  return out;
}

ComplexSystem subsample(const ComplexSystem& sys, Eigen::Index count, std::uint64_t seed) {
  const auto rows = sample_rows(sys.phi_c.rows(), count, seed);
  ComplexSystem out;
  out.phi_c.resize(count, sys.phi_c.cols());
  out.y_c.resize(count);
  for (Eigen::Index r = 0; r < count; ++r) {
    const auto src = rows[static_cast<std::size_t>(r)];
    out.phi_c.row(r) = sys.phi_c.row(src);
    out.y_c(r) = sys.y_c(src);
    if (!sys.sample_coords.empty()) out.sample_coords.push_back(sys.sample_coords[static_cast<std::size_t>(src)]);
  }
  out.column_names = sys.column_names;
  out.output_name = sys.output_name;
  for (Eigen::Index c = 0; c < out.phi_c.cols(); ++c) {
    if ((out.phi_c.col(c).array() == Complex(0.0, 0.0)).all()) {
      throw DictionaryError("subsampling produced an all-zero column '" +
                            out.column_names[static_cast<std::size_t>(c)] + "'");
    }
  }
  return out;
}

}  // namespace pdediscover
