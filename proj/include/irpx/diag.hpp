#ifndef IRPX_DIAG_HPP
#define IRPX_DIAG_HPP

#include <stdexcept>
#include <string>

namespace irpx {

// Exit code convention: 1 = user error (bad source, cycles, unknown
// entities), 2 = environment error (script failure, I/O).
class IrpError : public std::runtime_error {
public:
  explicit IrpError(std::string msg, int exit_code = 1)
      : std::runtime_error(std::move(msg)), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

private:
  int exit_code_;
};

inline std::string diag_at(const std::string &file, int line,
                           const std::string &msg) {
  return file + ":" + std::to_string(line) + ": " + msg;
}

[[noreturn]] inline void fail_at(const std::string &file, int line,
                                 const std::string &msg, int code = 1) {
  throw IrpError(diag_at(file, line, msg), code);
}

} // namespace irpx

#endif
