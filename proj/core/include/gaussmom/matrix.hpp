#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gaussmom {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Dense text matrices: a header line "rows cols real|complex" followed by the
// entries in row-major order, one "re" or "re im" group per entry. Blank
// lines and lines starting with '#' are ignored.
Matrix read_matrix(std::istream& in, std::string_view source_name = "<stream>");
Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const Matrix& m, bool complex_entries = true);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m, bool complex_entries = true);

// Every regular file of a directory in lexicographic filename order.
std::vector<Matrix> read_matrix_directory(const std::filesystem::path& dir);

// "diag:1,0.5" or "eye:3" shorthand, otherwise a matrix file path.
Matrix matrix_from_spec(std::string_view spec);

Matrix diagonal_matrix(const std::vector<double>& entries);

// Thrown for malformed matrix / moment / transfer-map text.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gaussmom
