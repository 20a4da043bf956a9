#ifndef IRPX_DIRECTIVES_HPP
#define IRPX_DIRECTIVES_HPP

#include "irpx/source_model.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace irpx {

// Names supplied with -D; membership is case-sensitive as given.
struct DefineSet {
  std::set<std::string> names;
  bool contains(const std::string &n) const { return names.count(n) != 0; }
};

struct ShellBlock {
  std::string interpreter;
  std::string script_body;
  std::string file;
  int line = 0;
};

// Per-run cache of script outputs, keyed by (interpreter, body).
using ShellCache = std::map<std::pair<std::string, std::string>, std::string>;

// Keeps the IRP_IF branch matching the define set, drops the other one.
// Blocks nest; kept lines retain their original line numbers.
std::vector<RawLine> eval_conditionals(const std::vector<RawLine> &lines,
                                       const DefineSet &defines,
                                       const std::string &file);

// Runs every BEGIN_SHELL block through its interpreter and splices the
// captured standard output in place. Single pass: spliced text containing
// another BEGIN_SHELL is a fatal diagnostic.
std::vector<RawLine> expand_shell_blocks(const std::vector<RawLine> &lines,
                                         const std::string &file,
                                         const std::string &workdir,
                                         int timeout_seconds,
                                         ShellCache &cache);

// Runs one script and returns its standard output.
std::string run_shell_block(const ShellBlock &block, const std::string &workdir,
                            int timeout_seconds, ShellCache &cache);

} // namespace irpx

#endif
