#include "densecap/error.hpp"

namespace densecap {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::invalid_bound: return "invalid-bound";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::equivalence: return "equivalence";
    case ErrorKind::data: return "data";
  }
  return "unknown";
}

}  // namespace densecap
