#pragma once

#include <stdexcept>
#include <string>

namespace ppf {

enum class Errc {
  io,         // file missing / unreadable / unwritable
  parse,      // malformed CSV or flag value
  model,      // corrupt or unsupported model file
  mismatch,   // data incompatible with model (dimension, hash)
  config,     // invalid configuration value
  degenerate, // data degenerate beyond what the algorithm handles
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::io: return "E_IO";
    case Errc::parse: return "E_PARSE";
    case Errc::model: return "E_MODEL";
    case Errc::mismatch: return "E_MISMATCH";
    case Errc::config: return "E_CONFIG";
    case Errc::degenerate: return "E_DEGENERATE";
    case Errc::internal: return "E_INTERNAL";
  }
  return "E_INTERNAL";
}

// Process exit code for each error class; documented in the README.
inline int errc_exit_code(Errc code) {
  switch (code) {
    case Errc::io: return 3;
    case Errc::parse: return 4;
    case Errc::model: return 5;
    case Errc::mismatch: return 6;
    case Errc::config: return 7;
    case Errc::degenerate: return 8;
    case Errc::internal: return 10;
  }
  return 10;
}

}  // namespace ppf
