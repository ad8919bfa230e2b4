#include "dgrf/harness.hpp"
#include "dgrf/io.hpp"

#include <doctest.h>

#include <sstream>

using namespace dgrf;

namespace {

std::vector<std::string> lines(const std::string& s)
{
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l))
    out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("format_double round-trips")
{
  for (double v : { 0.1, 1.0 / 3, -2.5e-300, 1e300, 0.0, 123456789.125 })
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("fgrid round trip")
{
  const FieldSample Y = sample_exact(CovarianceModel::powered_exponential(1, 1), Deformation::quadratic({ 0.15, 0 }),
                                     GridSpec{ 10, Rect{ 0, 0, 1.1, 1.1 }, 2 }, 99);
  std::stringstream s;
  write_fgrid(s, Y);
  const std::string text = s.str();
  CHECK(text.rfind("# fgrid v1\n", 0) == 0);
  CHECK(text.find("seed=99") != std::string::npos);
  const FieldSample Z = read_fgrid(s);
  CHECK(Z.seed == 99);
  CHECK(Z.grid.n() == 10);
  CHECK(Z.grid.spec().domain.x1 == 1.1);
  CHECK(Z.sampler == SamplerTag::exact_cholesky);
  CHECK((Z.values.array() == Y.values.array()).all());

  std::stringstream again;
  write_fgrid(again, Z);
  // model and deformation lines are informational and not read back
  const auto a = lines(text), b = lines(again.str());
  REQUIRE(b.size() + 2 == a.size());
  std::size_t k = 0;
  for (const auto& l : a)
    if (k < b.size() && l == b[k])
      ++k;
  CHECK(k == b.size());

  std::stringstream bad(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_fgrid(bad), Error);
  std::stringstream wrong("# poly v1\ndegree=0\n0 1 0\n");
  CHECK_THROWS_AS(read_fgrid(wrong), Error);
}

TEST_CASE("dfield round trip")
{
  const RegularGrid pts{ Vec2(0.2, 0.3), 0.1, 4, 3 };
  DilatationField D = exact_dilatation_field(Deformation::modulus_quadratic({ 0.3, 0.1 }), pts);
  D.masked(1, 2) = true;
  D.provenance = { 64, 0.25, KernelKind::gaussian, 1.5, true };
  std::stringstream s;
  write_dfield(s, D);
  const DilatationField E = read_dfield(s);
  CHECK(E.points.nx == 4);
  CHECK(E.points.ny == 3);
  CHECK(E.points.origin == pts.origin);
  CHECK((E.mu.array() == D.mu.array()).all());
  CHECK((E.tau.array() == D.tau.array()).all());
  CHECK((E.dmu.array() == D.dmu.array()).all());
  CHECK((E.masked == D.masked).all());
  CHECK(E.provenance.n == 64);
  CHECK(E.provenance.kernel == KernelKind::gaussian);
  CHECK(E.provenance.alpha == 1.5);
  CHECK(E.provenance.exact);
}

TEST_CASE("poly round trip")
{
  Eigen::VectorXcd c(3);
  c << Complex(1.0 / 3, -0.0), Complex(2e-310, 7.25), Complex(-1, 1e10);
  std::stringstream s;
  write_poly(s, HolomorphicPoly(c));
  CHECK(s.str().rfind("# poly v1\ndegree=2\n", 0) == 0);
  CHECK(read_poly(s).coeffs() == c);
}

TEST_CASE("vfield, qcmap and rmap dumps")
{
  const FieldSample Y = sample_exact(CovarianceModel::powered_exponential(1, 1), Deformation::identity(),
                                     GridSpec{ 16, {}, 2 }, 1);
  const RegularGrid pts = lattice_points_in(Y.grid, evaluable_region(Y.grid, 0.3, Kernel::triweight()));
  std::stringstream v;
  write_vfield(v, smoothed_variation_field(Y, pts, 0.3, Kernel::triweight(), 1.0));
  const auto vl = lines(v.str());
  CHECK(vl[0] == "# vfield v1");
  int blocks = 0;
  for (const auto& l : vl)
    blocks += l.rfind("h=", 0) == 0;
  CHECK(blocks == 3);

  ReconstructOptions o;
  o.qcmap.M = 64;
  o.qcmap.forward_samples = 9;
  o.qcmap.inverse_radial = 4;
  o.qcmap.inverse_angular = 8;
  o.rho_eval = 0.5;
  const ReconstructedMap m = reconstruct_f_exact(Deformation::identity(), o);

  std::stringstream q;
  write_qcmap(q, m.qcmap());
  const auto ql = lines(q.str());
  CHECK(ql[0] == "# qcmap v1");
  CHECK(q.str().find("\nM=64\n") != std::string::npos);
  CHECK(q.str().find("\nforward=9 9\n") != std::string::npos);
  CHECK(q.str().find("\ninverse=4 8\n") != std::string::npos);

  std::stringstream r;
  write_rmap(r, m, 5, { { "aligned_sup_error", "0" } });
  const auto rl = lines(r.str());
  CHECK(rl[0] == "# rmap v1");
  CHECK(r.str().find("\naligned_sup_error=0\n") != std::string::npos);
  int rows = 0;
  for (const auto& l : rl)
    rows += !l.empty() && l[0] != '#' && l.find('=') == std::string::npos;
  CHECK(rows == disk_sample_points(m.U(), m.rho_eval(), 5).size());
}
