#include "dgrf/io.hpp"

#include "dgrf/harness.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace dgrf {

namespace {

Error bad(const std::string& what) { return Error(ErrorCode::io, what); }

void expect_magic(std::istream& is, const std::string& kind)
{
  std::string line;
  if (!std::getline(is, line) || line != "# " + kind + " v1")
    throw bad("expected a '# " + kind + " v1' header line");
}

//! Reads `key=value` lines; the first line of another form, or whose key is
//! `stop`, is left in `pending`.
std::map<std::string, std::string> read_header(std::istream& is, std::string& pending, const std::string& stop = {})
{
  std::map<std::string, std::string> kv;
  std::string line;
  pending.clear();
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || (!stop.empty() && line.compare(0, eq, stop) == 0)) {
      pending = line;
      return kv;
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key)
{
  const auto it = kv.find(key);
  if (it == kv.end())
    throw bad("missing header key '" + key + "'");
  return it->second;
}

// strtod rather than stod: subnormal values set ERANGE but are valid dumps.
double parse_double(const std::string& tok)
{
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || (errno == ERANGE && std::abs(v) == HUGE_VAL))
    throw bad("bad number '" + tok + "'");
  return v;
}

std::vector<double> parse_numbers(const std::string& s)
{
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok)
    out.push_back(parse_double(tok));
  return out;
}

template<class T>
T parse_as(const std::string& s, const std::string& key)
{
  if constexpr (std::is_floating_point_v<T>) {
    const auto v = parse_numbers(s);
    if (v.size() != 1)
      throw bad("cannot parse '" + key + "' from '" + s + "'");
    return v[0];
  }
  std::istringstream in(s);
  T v{};
  if (!(in >> v))
    throw bad("cannot parse '" + key + "' from '" + s + "'");
  return v;
}

void write_points_header(std::ostream& os, const RegularGrid& g)
{
  os << "origin=" << format_double(g.origin.x()) << ' ' << format_double(g.origin.y()) << '\n'
     << "spacing=" << format_double(g.spacing) << '\n'
     << "nx=" << g.nx << '\n'
     << "ny=" << g.ny << '\n';
}

} // namespace

std::string format_double(double v)
{
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_fgrid(std::ostream& os, const FieldSample& Y)
{
  const GridSpec& s = Y.grid.spec();
  os << "# fgrid v1\n"
     << "n=" << s.n << '\n'
     << "domain=" << format_double(s.domain.x0) << ' ' << format_double(s.domain.y0) << ' '
     << format_double(s.domain.x1) << ' ' << format_double(s.domain.y1) << '\n'
     << "margin=" << s.margin << '\n'
     << "seed=" << Y.seed << '\n'
     << "sampler=" << to_string(Y.sampler) << '\n';
  if (Y.model)
    os << "model=" << Y.model->describe() << '\n';
  if (Y.deformation)
    os << "deformation=" << Y.deformation->describe() << '\n';
  for (Eigen::Index k = 0; k < Y.values.size(); ++k) {
    const Vec2 p = Y.grid.point(k);
    os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(Y.values[k]) << '\n';
  }
}

FieldSample read_fgrid(std::istream& is)
{
  expect_magic(is, "fgrid");
  std::string pending;
  const auto kv = read_header(is, pending);
  GridSpec spec;
  spec.n = parse_as<int>(need(kv, "n"), "n");
  const auto d = parse_numbers(need(kv, "domain"));
  if (d.size() != 4)
    throw bad("domain needs four numbers");
  spec.domain = { d[0], d[1], d[2], d[3] };
  spec.margin = parse_as<int>(need(kv, "margin"), "margin");
  if (spec.n <= 0 || spec.domain.empty() || spec.margin < 0)
    throw bad("invalid grid header");

  FieldSample Y{ Grid(spec), {}, parse_as<std::uint64_t>(need(kv, "seed"), "seed"),
                 sampler_from_string(need(kv, "sampler")), std::nullopt, std::nullopt };
  Y.values.resize(Y.grid.size());
  Eigen::Index k = 0;
  std::string line = pending;
  do {
    if (line.empty() || line[0] == '#')
      continue;
    const auto row = parse_numbers(line);
    if (row.size() != 3)
      throw bad("fgrid rows need three columns");
    if (k >= Y.values.size())
      throw bad("fgrid has more rows than its grid");
    const Vec2 p = Y.grid.point(k);
    if (std::abs(row[0] - p.x()) > 1e-9 || std::abs(row[1] - p.y()) > 1e-9)
      throw bad("fgrid row " + std::to_string(k) + " is not at the expected grid point");
    Y.values[k++] = row[2];
  } while (std::getline(is, line));
  if (k != Y.values.size())
    throw bad("fgrid has " + std::to_string(k) + " rows, expected " + std::to_string(Y.values.size()));
  return Y;
}

void write_vfield(std::ostream& os, const SmoothedVariationField& B)
{
  os << "# vfield v1\n"
     << "n=" << B.n << '\n'
     << "b=" << format_double(B.b) << '\n'
     << "alpha=" << format_double(B.alpha) << '\n';
  write_points_header(os, B.points);
  for (std::size_t d = 0; d < kDirections.size(); ++d) {
    os << "h=" << kDirections[d].dx << ' ' << kDirections[d].dy << '\n';
    for (int j = 0; j < B.points.ny; ++j)
      for (int i = 0; i < B.points.nx; ++i) {
        const Vec2 p = B.points.point(i, j);
        os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(B.values[d](i, j))
           << '\n';
      }
  }
}

void write_dfield(std::ostream& os, const DilatationField& D)
{
  const auto& pv = D.provenance;
  os << "# dfield v1\n"
     << "n=" << pv.n << '\n'
     << "b=" << format_double(pv.b) << '\n'
     << "alpha=" << format_double(pv.alpha) << '\n'
     << "kernel=" << to_string(pv.kernel) << '\n'
     << "exact=" << (pv.exact ? 1 : 0) << '\n';
  write_points_header(os, D.points);
  const auto block = [&](const char* name, auto&& row) {
    os << "field=" << name << '\n';
    for (int j = 0; j < D.points.ny; ++j)
      for (int i = 0; i < D.points.nx; ++i) {
        const Vec2 p = D.points.point(i, j);
        os << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << row(i, j) << '\n';
      }
  };
  block("mu", [&](int i, int j) { return format_double(D.mu(i, j).real()) + ' ' + format_double(D.mu(i, j).imag()); });
  block("tau", [&](int i, int j) { return format_double(D.tau(i, j)); });
  if (D.has_dmu())
    block("dmu",
          [&](int i, int j) { return format_double(D.dmu(i, j).real()) + ' ' + format_double(D.dmu(i, j).imag()); });
  block("masked", [&](int i, int j) { return std::string(D.masked(i, j) ? "1" : "0"); });
}

DilatationField read_dfield(std::istream& is)
{
  expect_magic(is, "dfield");
  std::string line;
  const auto kv = read_header(is, line, "field");
  DilatationField D;
  D.provenance.n = parse_as<int>(need(kv, "n"), "n");
  D.provenance.b = parse_as<double>(need(kv, "b"), "b");
  D.provenance.alpha = parse_as<double>(need(kv, "alpha"), "alpha");
  if (kv.count("kernel"))
    D.provenance.kernel = kernel_from_string(kv.at("kernel")).kind();
  if (kv.count("exact"))
    D.provenance.exact = kv.at("exact") == "1";
  const auto o = parse_numbers(need(kv, "origin"));
  if (o.size() != 2)
    throw bad("origin needs two numbers");
  D.points.origin = { o[0], o[1] };
  D.points.spacing = parse_as<double>(need(kv, "spacing"), "spacing");
  D.points.nx = parse_as<int>(need(kv, "nx"), "nx");
  D.points.ny = parse_as<int>(need(kv, "ny"), "ny");
  if (D.points.nx < 1 || D.points.ny < 1 || !(D.points.spacing > 0))
    throw bad("invalid point lattice");
  const int nx = D.points.nx, ny = D.points.ny;
  D.mu.setZero(nx, ny);
  D.tau.setZero(nx, ny);
  D.masked.setConstant(nx, ny, false);

  // `line` now holds the first block marker
  bool have_mu = false, have_tau = false;
  while (!line.empty() || std::getline(is, line)) {
    if (line.rfind("field=", 0) != 0)
      throw bad("expected a field= block marker, got '" + line + "'");
    const std::string name = line.substr(6);
    const int cols = (name == "mu" || name == "dmu") ? 4 : 3;
    if (name == "dmu")
      D.dmu.setZero(nx, ny);
    else if (name != "mu" && name != "tau" && name != "masked")
      throw bad("unknown field '" + name + "'");
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (!std::getline(is, line))
          throw bad("truncated field block '" + name + "'");
        const auto row = parse_numbers(line);
        if (int(row.size()) != cols)
          throw bad("field '" + name + "' rows need " + std::to_string(cols) + " columns");
        if (name == "mu")
          D.mu(i, j) = { row[2], row[3] };
        else if (name == "dmu")
          D.dmu(i, j) = { row[2], row[3] };
        else if (name == "tau")
          D.tau(i, j) = row[2];
        else
          D.masked(i, j) = row[2] != 0.0;
      }
    have_mu |= name == "mu";
    have_tau |= name == "tau";
    line.clear();
  }
  if (!have_mu || !have_tau)
    throw bad("dfield needs both mu and tau blocks");
  return D;
}

void write_qcmap(std::ostream& os, const QCMap& m)
{
  const Disk& U = m.U();
  os << "# qcmap v1\n"
     << "center=" << format_double(U.center.real()) << ' ' << format_double(U.center.imag()) << '\n'
     << "radius=" << format_double(U.radius) << '\n'
     << "M=" << m.options().M << '\n'
     << "k=" << format_double(m.k()) << '\n'
     << "rotation=" << format_double(m.rotation()) << '\n'
     << "riemann_degree=" << m.riemann().degree() << '\n'
     << "boundary_error=" << format_double(m.riemann().boundary_error()) << '\n';
  const Eigen::MatrixXcd& F = m.forward_table();
  const Eigen::Index s = F.rows();
  os << "forward=" << s << ' ' << F.cols() << '\n';
  for (Eigen::Index j = 0; j < F.cols(); ++j)
    for (Eigen::Index i = 0; i < s; ++i) {
      const double x = U.center.real() - U.radius + 2.0 * U.radius * double(i) / double(s - 1);
      const double y = U.center.imag() - U.radius + 2.0 * U.radius * double(j) / double(F.cols() - 1);
      os << format_double(x) << ' ' << format_double(y) << ' ' << format_double(F(i, j).real()) << ' '
         << format_double(F(i, j).imag()) << '\n';
    }
  const Eigen::MatrixXcd& I = m.inverse_table();
  os << "inverse=" << I.rows() << ' ' << I.cols() << '\n';
  for (Eigen::Index j = 0; j < I.cols(); ++j)
    for (Eigen::Index i = 0; i < I.rows(); ++i) {
      const Complex w = std::polar(m.inverse_radius(int(i)), m.inverse_angle(int(j)));
      os << format_double(w.real()) << ' ' << format_double(w.imag()) << ' ' << format_double(I(i, j).real()) << ' '
         << format_double(I(i, j).imag()) << '\n';
    }
}

void write_rmap(std::ostream& os, const ReconstructedMap& m, int per_axis,
                const std::map<std::string, std::string>& extra)
{
  const auto& pv = m.provenance();
  const Disk& U = m.U();
  os << "# rmap v1\n"
     << "center=" << format_double(U.center.real()) << ' ' << format_double(U.center.imag()) << '\n'
     << "radius=" << format_double(U.radius) << '\n'
     << "rho_eval=" << format_double(m.rho_eval()) << '\n'
     << "n=" << pv.n << '\n'
     << "b=" << format_double(pv.b) << '\n'
     << "seed=" << pv.seed << '\n'
     << "exact=" << (pv.exact ? 1 : 0) << '\n';
  if (!pv.model.empty())
    os << "model=" << pv.model << '\n';
  if (!pv.deformation.empty())
    os << "deformation=" << pv.deformation << '\n';
  os << "k=" << format_double(m.qcmap().k()) << '\n'
     << "degree=" << m.g().log_derivative.degree() << '\n'
     << "projection_residual=" << format_double(m.projection_residual()) << '\n';
  for (const auto& [key, value] : extra)
    os << key << '=' << value << '\n';
  const Eigen::VectorXcd z = disk_sample_points(U, m.rho_eval(), per_axis);
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const Complex w = m(z[k]);
    os << format_double(z[k].real()) << ' ' << format_double(z[k].imag()) << ' ' << format_double(w.real()) << ' '
       << format_double(w.imag()) << '\n';
  }
}

void write_poly(std::ostream& os, const HolomorphicPoly& p)
{
  os << "# poly v1\n"
     << "degree=" << p.degree() << '\n';
  for (Eigen::Index k = 0; k < p.coeffs().size(); ++k)
    os << k << ' ' << format_double(p.coeffs()[k].real()) << ' ' << format_double(p.coeffs()[k].imag()) << '\n';
}

HolomorphicPoly read_poly(std::istream& is)
{
  expect_magic(is, "poly");
  std::string line;
  const auto kv = read_header(is, line);
  const int degree = parse_as<int>(need(kv, "degree"), "degree");
  if (degree < 0)
    throw bad("negative degree");
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(degree + 1);
  int rows = 0;
  do {
    if (line.empty())
      continue;
    const auto row = parse_numbers(line);
    if (row.size() != 3 || row[0] != std::floor(row[0]) || row[0] < 0 || row[0] > degree)
      throw bad("bad coefficient row '" + line + "'");
    c[Eigen::Index(row[0])] = { row[1], row[2] };
    ++rows;
  } while (std::getline(is, line));
  if (rows != degree + 1)
    throw bad("expected " + std::to_string(degree + 1) + " coefficient rows");
  return HolomorphicPoly(std::move(c));
}

} // namespace dgrf
