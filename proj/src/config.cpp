#include "dgrf/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace dgrf {

namespace {

namespace pt = boost::property_tree;

Error config_error(const std::string& what) { return Error(ErrorCode::config, what); }

class Section
{
public:
  Section(const pt::ptree& root, std::string name, std::set<std::string> allowed)
    : name_(std::move(name))
  {
    if (const auto child = root.get_child_optional(name_))
      tree_ = *child;
    for (const auto& [key, value] : tree_) {
      if (!value.empty())
        throw config_error("[" + name_ + "] has nested entries under '" + key + "'");
      if (!allowed.count(key))
        throw config_error("unknown key '" + key + "' in [" + name_ + "]");
    }
  }

  bool has(const std::string& key) const { return bool(tree_.get_optional<std::string>(key)); }

  std::string str(const std::string& key, const std::string& fallback) const
  {
    return tree_.get<std::string>(key, fallback);
  }

  std::vector<double> numbers(const std::string& key, std::size_t count) const
  {
    const std::string raw = tree_.get<std::string>(key);
    std::istringstream in(raw);
    std::vector<double> out;
    std::string tok;
    while (in >> tok)
      out.push_back(to_double(key, tok));
    if (count && out.size() != count)
      throw config_error("[" + name_ + "] " + key + " needs " + std::to_string(count) + " numbers, got '" + raw + "'");
    return out;
  }

  double num(const std::string& key, double fallback) const
  {
    return has(key) ? numbers(key, 1)[0] : fallback;
  }

  template<class Int>
  Int integer(const std::string& key, Int fallback) const
  {
    if (!has(key))
      return fallback;
    const std::string raw = tree_.get<std::string>(key);
    std::istringstream in(raw);
    Int v{};
    std::string rest;
    if (!(in >> v) || (in >> rest))
      throw config_error("[" + name_ + "] " + key + " must be an integer, got '" + raw + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const
  {
    if (!has(key))
      return fallback;
    const std::string v = tree_.get<std::string>(key);
    if (v == "true" || v == "yes" || v == "1")
      return true;
    if (v == "false" || v == "no" || v == "0")
      return false;
    throw config_error("[" + name_ + "] " + key + " must be true or false, got '" + v + "'");
  }

  Complex point(const std::string& key, Complex fallback) const
  {
    if (!has(key))
      return fallback;
    const auto v = numbers(key, 2);
    return { v[0], v[1] };
  }

private:
  double to_double(const std::string& key, const std::string& tok) const
  {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used == tok.size() && std::isfinite(v))
        return v;
    } catch (const std::logic_error&) {
    }
    throw config_error("[" + name_ + "] " + key + ": '" + tok + "' is not a finite number");
  }

  std::string name_;
  pt::ptree tree_;
};

CovarianceModel parse_model(const pt::ptree& root)
{
  const Section s(root, "model", { "family", "c", "alpha", "nu", "range", "variance", "normalize" });
  const std::string family = s.str("family", "powered-exponential");
  CovarianceModel m = [&] {
    if (family == "powered-exponential")
      return CovarianceModel::powered_exponential(s.num("c", 1.0), s.num("alpha", 1.0));
    if (family == "matern")
      return CovarianceModel::matern(s.num("nu", 0.5), s.num("range", 1.0), s.num("variance", 1.0));
    throw config_error("unknown covariance family '" + family + "'");
  }();
  return s.flag("normalize", true) ? m.normalized() : m;
}

Deformation parse_deformation(const pt::ptree& root)
{
  const Section s(root, "deformation", { "kind", "matrix", "shift", "eps", "rotation", "translation" });
  const std::string kind = s.str("kind", "identity");
  Deformation d = [&] {
    if (kind == "identity")
      return Deformation::identity();
    if (kind == "affine") {
      const auto a = s.has("matrix") ? s.numbers("matrix", 4) : std::vector<double>{ 1, 0, 0, 1 };
      Mat2 A;
      A << a[0], a[1], a[2], a[3];
      return Deformation::affine(A, to_vec(s.point("shift", 0.0)));
    }
    if (kind == "quadratic")
      return Deformation::quadratic(s.point("eps", 0.0));
    if (kind == "modulus-quadratic")
      return Deformation::modulus_quadratic(s.point("eps", 0.0));
    throw config_error("unknown deformation kind '" + kind + "'");
  }();
  if (s.has("rotation") || s.has("translation"))
    d = d.then_rigid(s.num("rotation", 0.0), s.point("translation", 0.0));
  return d;
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw config_error(std::string("malformed configuration: ") + e.what());
  }
  static const std::set<std::string> sections{ "model", "deformation", "grid", "bandwidth", "solver", "sweep" };
  for (const auto& [name, body] : root) {
    if (!sections.count(name))
      throw config_error(body.empty() ? "key '" + name + "' outside any section" : "unknown section [" + name + "]");
  }

  ExperimentConfig c;
  try {
    c.model = parse_model(root);
    c.deformation = parse_deformation(root);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config)
      throw;
    throw config_error(e.detail());
  }

  const Section grid(root, "grid", { "n", "domain", "margin", "sampler", "cap", "oversample", "seed" });
  c.grid.n = grid.integer("n", c.grid.n);
  if (grid.has("domain")) {
    const auto d = grid.numbers("domain", 4);
    c.grid.domain = { d[0], d[1], d[2], d[3] };
  }
  c.grid.margin = grid.integer("margin", c.grid.margin);
  c.sampler.tag = sampler_from_string(grid.str("sampler", to_string(c.sampler.tag)));
  c.sampler.exact.cap = grid.integer<Eigen::Index>("cap", c.sampler.exact.cap);
  c.sampler.fast.oversample = grid.integer("oversample", c.sampler.fast.oversample);
  c.seed = grid.integer<std::uint64_t>("seed", c.seed);

  const Section bw(root, "bandwidth", { "c_b", "beta_prime", "kernel", "use" });
  c.bandwidth.c_b = bw.num("c_b", c.bandwidth.c_b);
  c.bandwidth.beta_prime = bw.num("beta_prime", default_beta_prime(c.model.local_expansion().gamma));
  c.kernel = kernel_from_string(bw.str("kernel", to_string(c.kernel))).kind();
  const std::string use = bw.str("use", "derivative");
  if (use != "variation" && use != "derivative")
    throw config_error("[bandwidth] use must be 'variation' or 'derivative'");
  c.bandwidth_derivative = use == "derivative";

  const Section sv(root, "solver", { "center", "radius", "rho_eval", "box_factor", "M", "rho_out_factor", "tol",
                                     "max_iter", "riemann_degree", "tol_boundary", "degree", "delta_inv", "tol_inv",
                                     "extension" });
  c.U.center = sv.point("center", c.U.center);
  c.U.radius = sv.num("radius", c.U.radius);
  c.rho_eval = sv.num("rho_eval", c.rho_eval);
  c.qcmap.box_factor = sv.num("box_factor", c.qcmap.box_factor);
  c.qcmap.M = sv.integer("M", c.qcmap.M);
  c.qcmap.rho_out_factor = sv.num("rho_out_factor", c.qcmap.rho_out_factor);
  c.qcmap.beltrami.tol = sv.num("tol", c.qcmap.beltrami.tol);
  c.qcmap.beltrami.max_iter = sv.integer("max_iter", c.qcmap.beltrami.max_iter);
  c.qcmap.riemann.degree = sv.integer("riemann_degree", c.qcmap.riemann.degree);
  c.qcmap.riemann.tol_boundary = sv.num("tol_boundary", c.qcmap.riemann.tol_boundary);
  c.degree = sv.integer("degree", c.degree);
  c.qcmap.delta_inv = sv.num("delta_inv", c.qcmap.delta_inv);
  c.qcmap.tol_inv = sv.num("tol_inv", c.qcmap.tol_inv);
  c.extension = data_extension_from_string(sv.str("extension", to_string(c.extension)));

  const Section sw(root, "sweep", { "n", "metric_fraction", "output_dir", "reconstruct" });
  if (sw.has("n")) {
    c.sweep_n.clear();
    for (double v : sw.numbers("n", 0)) {
      if (v != std::floor(v))
        throw config_error("[sweep] n values must be integers");
      c.sweep_n.push_back(int(v));
    }
  }
  c.metric_fraction = sw.num("metric_fraction", c.metric_fraction);
  c.output_dir = sw.str("output_dir", c.output_dir);
  c.reconstruct = sw.flag("reconstruct", c.reconstruct);

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::config, "cannot open configuration file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

ReconstructOptions ExperimentConfig::reconstruct_options() const
{
  ReconstructOptions o;
  o.U = U;
  o.kernel = kernel;
  o.bandwidth = bandwidth;
  o.qcmap = qcmap;
  o.rho_eval = rho_eval;
  o.degree = degree;
  o.extension = extension;
  return o;
}

void ExperimentConfig::validate() const
{
  const auto fail = [](const std::string& what) { throw config_error(what); };
  const LocalExpansion le = model.local_expansion();
  validate_bandwidth(bandwidth, le.gamma, bandwidth_derivative ? BandwidthUse::derivative : BandwidthUse::variation);
  if (!(bandwidth.c_b > 0))
    fail("bandwidth constant c_b must be positive");

  if (grid.domain.empty())
    fail("grid domain must have x0 < x1 and y0 < y1");
  if (grid.margin < 0)
    fail("grid margin must be nonnegative");
  if (grid.n < 4)
    fail("grid n must be at least 4");
  if (sweep_n.empty())
    fail("sweep list of n is empty");
  for (std::size_t k = 0; k < sweep_n.size(); ++k) {
    if (sweep_n[k] < 4)
      fail("sweep n values must be at least 4");
    if (k > 0 && sweep_n[k] <= sweep_n[k - 1])
      fail("sweep n values must be strictly increasing");
  }
  if (sampler.tag == SamplerTag::exact_cholesky) {
    for (int n : { grid.n, sweep_n.back() }) {
      const Grid g(GridSpec{ n, grid.domain, grid.margin });
      if (g.size() > sampler.exact.cap)
        fail("n = " + std::to_string(n) + " needs " + std::to_string(g.size()) +
             " grid points, above the exact sampler cap " + std::to_string(sampler.exact.cap) +
             "; raise [grid] cap or use sampler = circulant-interp");
    }
  } else if (sampler.fast.oversample < 2) {
    fail("oversample must be at least 2");
  }

  const ValidityReport v = deformation_validity(deformation, grid.domain);
  if (!v.passed)
    fail("deformation " + deformation.describe() + " is not an orientation-preserving diffeomorphism on the domain");

  if (!(U.radius > 0))
    fail("U radius must be positive");
  if (!(rho_eval > 0 && rho_eval <= 1))
    fail("rho_eval must lie in (0, 1]");
  if (!(metric_fraction > 0 && metric_fraction <= rho_eval))
    fail("metric_fraction must lie in (0, rho_eval]");
  if (!(qcmap.box_factor >= 4))
    fail("box_factor must be at least 4");
  if (qcmap.M < 32 || (qcmap.M & (qcmap.M - 1)) != 0)
    fail("M must be a power of two, at least 32");
  if (!(qcmap.rho_out_factor > 1 && qcmap.rho_out_factor * 2 < qcmap.box_factor))
    fail("rho_out_factor must exceed 1 and leave the cutoff inside the box");
  if (!(qcmap.beltrami.tol > 0) || qcmap.beltrami.max_iter < 1)
    fail("solver tol must be positive and max_iter at least 1");
  if (qcmap.riemann.degree < 1 || degree < 1)
    fail("polynomial degrees must be positive");
  if (!(qcmap.delta_inv > 0 && qcmap.delta_inv < 0.5))
    fail("delta_inv must lie in (0, 0.5)");

  if (reconstruct) {
    const Kernel K = kernel_from_string(to_string(kernel));
    for (int n : sweep_n) {
      const Grid g(GridSpec{ n, grid.domain, grid.margin });
      try {
        estimation_points(g, U, bandwidth(n), K);
      } catch (const Error& e) {
        fail("at n = " + std::to_string(n) + ": " + e.detail());
      }
    }
  }
  if (sweep_metric_region(*this).empty())
    fail("the variation metric region is empty: the bandwidth at the smallest n is too large for the domain");
}

} // namespace dgrf
