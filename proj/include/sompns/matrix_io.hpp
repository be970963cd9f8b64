#pragma once

#include "sompns/types.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace sompns {

// Text matrix format shared by dictionaries, measurement matrices and sparse
// signal matrices:
//   line 1:  "# dims m n"
//   lines 2..m+1: n comma-separated decimals, 12 significant digits.
// Round-tripping reproduces all dictionary metrics to better than 1e-9.

std::string matrix_csv_string(const Matrix& a);
Matrix parse_matrix_csv(std::istream& in);
Matrix parse_matrix_csv_string(const std::string& text);

Matrix load_matrix_csv(const std::string& path);
void store_matrix_csv(const Matrix& a, const std::string& path);

Dictionary load_dictionary(const std::string& path);
void store_dictionary(const Dictionary& d, const std::string& path);

/// Hex-encoded SHA-256 digest; used to stamp experiment outputs with the
/// dictionary and config they were produced from.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace sompns
