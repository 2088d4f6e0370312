#ifndef MIA_ERRORS_HPP
#define MIA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mia {

// Bad parameter value (out-of-range knob, impossible size).
struct InvalidParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Structurally bad input data (non-finite logit, dimension mismatch).
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Class label outside [0, k).
struct InvalidLabelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// KL divergence requested where q_i = 0 on the support of p.
struct DivergenceUndefinedError : std::domain_error {
  using std::domain_error::domain_error;
};

// Binary training data containing only one class.
struct DegenerateLabelsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Loss went NaN during optimization.
struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed row in an interchange file; carries a 1-based line number.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_number(line) {}
  int line_number;
};

// File-level schema violation (inconsistent k, missing header, no records).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad experiment/CLI configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mia

#endif  // MIA_ERRORS_HPP
