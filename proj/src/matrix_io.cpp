#include "sompns/matrix_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sompns {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

}  // namespace

std::string matrix_csv_string(const Matrix& a) {
  std::string out = "# dims " + std::to_string(a.rows()) + " " +
                    std::to_string(a.cols()) + "\n";
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out += ",";
      out += format_value(a(i, j));
    }
    out += "\n";
  }
  return out;
}

Matrix parse_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("matrix file: empty input");
  Index rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "# dims %td %td", &rows, &cols) != 2)
    throw ConfigError("matrix file: first line must be '# dims m n', got '" +
                      line + "'");
  if (rows < 1 || cols < 1)
    throw ConfigError("matrix file: dimensions must be at least 1x1");

  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw ConfigError("matrix file: expected " + std::to_string(rows) +
                        " data rows, got " + std::to_string(i));
    std::stringstream row(line);
    std::string cell;
    for (Index j = 0; j < cols; ++j) {
      if (!std::getline(row, cell, ','))
        throw ConfigError("matrix file: row " + std::to_string(i + 1) +
                          " has fewer than " + std::to_string(cols) +
                          " values");
      try {
        a(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("matrix file: bad value '" + cell + "' at row " +
                          std::to_string(i + 1));
      }
    }
    if (std::getline(row, cell, ','))
      throw ConfigError("matrix file: row " + std::to_string(i + 1) +
                        " has more than " + std::to_string(cols) + " values");
  }
  return a;
}

Matrix parse_matrix_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_csv(in);
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_matrix_csv(in);
}

void store_matrix_csv(const Matrix& a, const std::string& path) {
  write_file(path, matrix_csv_string(a));
}

Dictionary load_dictionary(const std::string& path) {
  return Dictionary(load_matrix_csv(path));
}

void store_dictionary(const Dictionary& d, const std::string& path) {
  store_matrix_csv(d.entries(), path);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

}  // namespace sompns
