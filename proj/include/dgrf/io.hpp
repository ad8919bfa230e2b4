#pragma once

#include "dgrf/bergman.hpp"
#include "dgrf/dilatation.hpp"
#include "dgrf/qcmap.hpp"
#include "dgrf/qvar.hpp"
#include "dgrf/reconstruct.hpp"
#include "dgrf/simulate.hpp"

#include <iosfwd>
#include <map>
#include <string>

// Plain-text dumps. Each starts with a "# <kind> v1" line, then `key=value`
// header lines, then whitespace-separated rows. Floats use 17 significant digits.

namespace dgrf {

void write_fgrid(std::ostream& os, const FieldSample& Y);
FieldSample read_fgrid(std::istream& is);

void write_vfield(std::ostream& os, const SmoothedVariationField& B);

void write_dfield(std::ostream& os, const DilatationField& D);
DilatationField read_dfield(std::istream& is);

void write_qcmap(std::ostream& os, const QCMap& m);

//! Rows `x y re im` of f_hat on a square lattice over its evaluable disk.
void write_rmap(std::ostream& os, const ReconstructedMap& m, int per_axis = 41,
                const std::map<std::string, std::string>& extra = {});

void write_poly(std::ostream& os, const HolomorphicPoly& p);
HolomorphicPoly read_poly(std::istream& is);

//! Shortest round-trippable decimal form used in every dump.
std::string format_double(double v);

} // namespace dgrf
