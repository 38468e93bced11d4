#include "stap/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stap {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const CMat& m,
                  const std::vector<std::pair<std::string, std::string>>&
                      metadata) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& [key, value] : metadata) out << "# " << key << " " << value << "\n";
  out << m.rows() << " " << m.cols() << " complex128\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << " ";
      out << fmt(m(r, c).real()) << " " << fmt(m(r, c).imag());
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

CMat read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    break;
  }
  std::istringstream header(line);
  Eigen::Index rows = 0, cols = 0;
  std::string type;
  if (!(header >> rows >> cols >> type) || rows < 0 || cols < 0)
    throw IoError(path.string() + ": malformed matrix header '" + line + "'");
  if (type != "complex128")
    throw IoError(path.string() + ": unsupported element type '" + type + "'");

  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      if (!(in >> re >> im))
        throw IoError(path.string() + ": truncated matrix data");
      m(r, c) = Complex(re, im);
    }
  return m;
}

void write_training(const std::filesystem::path& path, const TrainingSet& z) {
  write_matrix(path, z.samples);
}

TrainingSet read_training(const std::filesystem::path& path) {
  TrainingSet z;
  z.samples = read_matrix(path);
  z.dim = static_cast<int>(z.samples.rows());
  z.count = static_cast<int>(z.samples.cols());
  if (z.count < 1) throw IoError(path.string() + ": training set has no snapshots");
  return z;
}

}  // namespace stap
