#include "lossylearn/error.hpp"

namespace lossylearn {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::stochasticity: return "stochasticity";
    case ErrorKind::support: return "support";
    case ErrorKind::schema: return "schema";
    case ErrorKind::enumeration_cap: return "enumeration-too-large";
    case ErrorKind::solver: return "solver";
    case ErrorKind::capability: return "capability";
    case ErrorKind::hypothesis: return "hypothesis-violated";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace lossylearn
