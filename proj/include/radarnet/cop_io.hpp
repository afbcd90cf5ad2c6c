#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "radarnet/cop.hpp"

namespace radarnet::cop {

/// Instance file does not match the schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance document:
//   {"radars":  [{"id": 1, "budget": 1.0}, ...],
//    "targets": [7, 8, ...],
//    "gamma":   [[g_1,t1, g_1,t2, ...], ...]          (radar-major)
//    "c":       [[[c_i,k,t1, ...], ...], ...]}        (c[i][k][j])
CopInstance read_instance(std::istream& in);
CopInstance read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const CopInstance& inst);

}  // namespace radarnet::cop
