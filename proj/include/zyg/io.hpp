#pragma once

// ZYGF binary container. Layout, all little-endian:
//   magic "ZYGF", u32 version = 1,
//   u32 kind (0 scalar, 1 form, 2 frame, 3 matrix),
//   u32 ndim, ndim x u32 sizes, f64 half_width,
//   kind-specific header:
//     form:   u32 degree, u32 ncomp, then per component degree x u32 axes
//     frame:  u32 q, u32 has_c
//     matrix: u32 rows, u32 cols
//   payload: f64 row-major samples in declared order.
// Round trips are bit-identical.

#include <string>
#include <variant>

#include "zyg/grid.hpp"

namespace zyg {

using FieldObject = std::variant<ScalarField, FormField, Frame, MatrixField>;

void field_io_write(const std::string& path, const FieldObject& obj);
FieldObject field_io_read(const std::string& path);

void write_scalar(const std::string& path, const ScalarField& f);
ScalarField read_scalar(const std::string& path);

}  // namespace zyg
