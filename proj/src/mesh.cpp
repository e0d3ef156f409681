#include "fracobs/mesh.hpp"

#include "fracobs/errors.hpp"

#include <cmath>
#include <string>

namespace fracobs {

Mesh::Mesh(double lo, double hi, int interior_nodes) : x_lo(lo), x_hi(hi), n(interior_nodes) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw UsageError("mesh: need finite x_lo < x_hi");
    }
    if (interior_nodes < 1) {
        throw UsageError("mesh: need at least one interior node, got " +
                         std::to_string(interior_nodes));
    }
}

}  // namespace fracobs
