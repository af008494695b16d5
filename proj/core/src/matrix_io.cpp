#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gaussmom/matrix.hpp"

namespace gaussmom {

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Matrix read_matrix(std::istream& in, std::string_view source_name) {
  std::string line;
  auto where = [&](const std::string& what) { return FormatError(std::string(source_name) + ": " + what); };
  if (!next_content_line(in, line)) throw where("missing matrix header");
  std::istringstream header(line);
  long rows = 0, cols = 0;
  std::string kind;
  if (!(header >> rows >> cols >> kind) || rows < 1 || cols < 1 || (kind != "real" && kind != "complex")) {
    throw where("bad header '" + line + "' (want 'rows cols real|complex')");
  }
  bool complex_entries = kind == "complex";
  std::vector<double> numbers;
  while (next_content_line(in, line)) {
    std::istringstream row(line);
    std::string token;
    while (row >> token) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) throw where("bad number '" + token + "'");
      numbers.push_back(v);
    }
  }
  std::size_t per_entry = complex_entries ? 2 : 1;
  std::size_t expected = static_cast<std::size_t>(rows * cols) * per_entry;
  if (numbers.size() != expected) {
    throw where("expected " + std::to_string(expected) + " numbers, found " + std::to_string(numbers.size()));
  }
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      double re = numbers[k++];
      double im = complex_entries ? numbers[k++] : 0.0;
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open matrix file " + path.string());
  return read_matrix(in, path.string());
}

void write_matrix(std::ostream& out, const Matrix& m, bool complex_entries) {
  auto old_precision = out.precision(17);
  out << m.rows() << " " << m.cols() << " " << (complex_entries ? "complex" : "real") << "\n";
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      if (j) out << "  ";
      out << m(i, j).real();
      if (complex_entries) out << " " << m(i, j).imag();
    }
    out << "\n";
  }
  out.precision(old_precision);
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m, bool complex_entries) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write matrix file " + path.string());
  write_matrix(out, m, complex_entries);
}

std::vector<Matrix> read_matrix_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Matrix> out;
  for (const auto& f : files) out.push_back(read_matrix_file(f));
  if (out.empty()) throw FormatError("no observation files in " + dir.string());
  return out;
}

Matrix diagonal_matrix(const std::vector<double>& entries) {
  Matrix m = Matrix::Zero(static_cast<long>(entries.size()), static_cast<long>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) m(static_cast<long>(i), static_cast<long>(i)) = entries[i];
  return m;
}

Matrix matrix_from_spec(std::string_view spec) {
  auto parse_list = [&](std::string_view body) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= body.size()) {
      auto comma = body.find(',', start);
      auto token = body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      double v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError("bad matrix shorthand '" + std::string(spec) + "'");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return values;
  };
  if (spec.starts_with("diag:")) return diagonal_matrix(parse_list(spec.substr(5)));
  if (spec.starts_with("eye:")) {
    auto v = parse_list(spec.substr(4));
    if (v.size() != 1 || v[0] < 1 || v[0] != static_cast<double>(static_cast<long>(v[0]))) {
      throw FormatError("bad identity shorthand '" + std::string(spec) + "'");
    }
    return Matrix::Identity(static_cast<long>(v[0]), static_cast<long>(v[0]));
  }
  return read_matrix_file(std::filesystem::path(std::string(spec)));
}

}  // namespace gaussmom
