#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hemorom/field.hpp"
#include "hemorom/linalg.hpp"

namespace hemorom {

/// Shortest round-trippable decimal: 17 significant digits.
std::string fmt17(double x);

/// ROMFLD v1 field files: header `ROMFLD v1 <scalar|vector> <nx> <ny>`,
/// then one line per cell, row-major.
void write_field(const std::filesystem::path& path, const ScalarField& f,
                 int nx, int ny);
void write_field(const std::filesystem::path& path, const VectorField& f,
                 int nx, int ny);
ScalarField read_scalar_field(const std::filesystem::path& path, int* nx = nullptr,
                              int* ny = nullptr);
VectorField read_vector_field(const std::filesystem::path& path, int* nx = nullptr,
                              int* ny = nullptr);

/// ROMMAT v1 / ROMTEN v1 text matrices and rank-3 tensors, row-major.
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_tensor(const std::filesystem::path& path);

/// FNV-1a 64-bit checksum of a file's bytes, as fixed-width hex.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace hemorom
