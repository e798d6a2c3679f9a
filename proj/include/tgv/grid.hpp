/* Regular 1-D / 2-D pixel grids.
 *
 * A grid is n1 x n2 pixels (n2 = 1 in one dimension) with uniform spacing h.
 * Pixel (i, j) is stored row-major at index i*n2 + j and carries the centred
 * coordinate ((i - (n1-1)/2)h, (j - (n2-1)/2)h), so flips and quarter-turns
 * of the index lattice are exact coordinate symmetries.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tgv {

struct GridShape {
    int dims = 2;          // 1 or 2
    int n1 = 0;            // pixels along axis 1 (rows)
    int n2 = 1;            // pixels along axis 2 (cols); 1 in 1-D
    double spacing = 1.0;  // uniform in both axes

    std::size_t pixel_count() const { return static_cast<std::size_t>(n1) * n2; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }

    // spacing^dims, the quadrature weight of one pixel
    double cell_measure() const { return dims == 1 ? spacing : spacing * spacing; }

    // centred coordinates of pixel (i, j)
    double x1(int i) const { return (i - 0.5 * (n1 - 1)) * spacing; }
    double x2(int j) const { return (j - 0.5 * (n2 - 1)) * spacing; }

    bool operator==(const GridShape& o) const {
        return dims == o.dims && n1 == o.n1 && n2 == o.n2 && spacing == o.spacing;
    }
    bool operator!=(const GridShape& o) const { return !(*this == o); }
};

inline GridShape grid_1d(int n, double spacing = 1.0) { return GridShape{1, n, 1, spacing}; }
inline GridShape grid_2d(int n1, int n2, double spacing = 1.0) { return GridShape{2, n1, n2, spacing}; }

inline void validate(const GridShape& s) {
    if (s.dims != 1 && s.dims != 2)
        throw std::invalid_argument("GridShape: dims must be 1 or 2");
    if (s.n1 < 2)
        throw std::invalid_argument("GridShape: n1 must be >= 2");
    if (s.n2 < 1 || (s.dims == 1 && s.n2 != 1) || (s.dims == 2 && s.n2 < 2))
        throw std::invalid_argument("GridShape: bad n2 for dims=" + std::to_string(s.dims));
    if (!(s.spacing > 0.0))
        throw std::invalid_argument("GridShape: spacing must be positive");
}

}  // namespace tgv
