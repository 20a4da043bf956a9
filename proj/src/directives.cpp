#include "irpx/directives.hpp"
#include "irpx/diag.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace irpx {

namespace {

std::string trimmed(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "irp_if NAME" -> NAME (original casing), empty if not an IRP_IF line
bool match_directive(const std::string &text, const std::string &kw,
                     std::string *arg) {
  std::string t = trimmed(text);
  std::string lt = lower(t);
  if (lt.rfind(kw, 0) != 0)
    return false;
  if (lt.size() > kw.size() && !std::isspace(static_cast<unsigned char>(lt[kw.size()])))
    return false;
  if (arg)
    *arg = trimmed(t.substr(std::min(t.size(), kw.size())));
  return true;
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::vector<RawLine> eval_conditionals(const std::vector<RawLine> &lines,
                                       const DefineSet &defines,
                                       const std::string &file) {
  std::vector<RawLine> out;
  // Stack of (taking: are we emitting in this block right now,
  //            taken: has any branch of this block been emitted,
  //            line of the IRP_IF for diagnostics)
  struct Frame {
    bool taking;
    bool else_seen;
    int line;
  };
  std::vector<Frame> stack;

  auto active = [&] {
    for (const auto &f : stack)
      if (!f.taking)
        return false;
    return true;
  };

  for (const auto &l : lines) {
    std::string arg;
    if (match_directive(l.text, "irp_if", &arg)) {
      if (arg.empty())
        fail_at(file, l.line_number, "IRP_IF requires a name");
      stack.push_back({defines.contains(arg), false, l.line_number});
    } else if (match_directive(l.text, "irp_else", nullptr)) {
      if (stack.empty())
        fail_at(file, l.line_number, "IRP_ELSE outside IRP_IF");
      if (stack.back().else_seen)
        fail_at(file, l.line_number, "duplicate IRP_ELSE");
      stack.back().taking = !stack.back().taking;
      stack.back().else_seen = true;
    } else if (match_directive(l.text, "irp_endif", nullptr)) {
      if (stack.empty())
        fail_at(file, l.line_number, "IRP_ENDIF outside IRP_IF");
      stack.pop_back();
    } else if (active()) {
      out.push_back(l);
    }
  }
  if (!stack.empty())
    fail_at(file, stack.back().line, "unterminated IRP_IF");
  return out;
}

std::string run_shell_block(const ShellBlock &block, const std::string &workdir,
                            int timeout_seconds, ShellCache &cache) {
  auto key = std::make_pair(block.interpreter, block.script_body);
  if (auto it = cache.find(key); it != cache.end())
    return it->second;

  fs::path tmp = fs::temp_directory_path();
  static std::mt19937_64 rng{std::random_device{}()};
  std::string stem = "irpx_shell_" + std::to_string(rng());
  fs::path script = tmp / (stem + ".script");
  fs::path out = tmp / (stem + ".out");
  fs::path err = tmp / (stem + ".err");
  {
    std::ofstream s(script);
    s << block.script_body;
  }

  std::string cmd = "cd '" + workdir + "' && timeout " +
                    std::to_string(timeout_seconds) + " " + block.interpreter +
                    " '" + script.string() + "' > '" + out.string() + "' 2> '" +
                    err.string() + "'";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::string captured = read_file(out);
  std::string errors = read_file(err);
  fs::remove(script);
  fs::remove(out);
  fs::remove(err);

  if (code == 124)
    fail_at(block.file, block.line,
            "embedded script timed out after " +
                std::to_string(timeout_seconds) + "s",
            2);
  if (code != 0)
    fail_at(block.file, block.line,
            "embedded script failed (interpreter '" + block.interpreter +
                "', exit " + std::to_string(code) + ")" +
                (errors.empty() ? "" : ":\n" + errors),
            2);

  cache.emplace(std::move(key), captured);
  return captured;
}

std::vector<RawLine> expand_shell_blocks(const std::vector<RawLine> &lines,
                                         const std::string &file,
                                         const std::string &workdir,
                                         int timeout_seconds,
                                         ShellCache &cache) {
  std::vector<RawLine> out;
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string head;
    if (!match_directive(lines[i].text, "begin_shell", &head)) {
      out.push_back(lines[i]);
      continue;
    }
    if (head.size() < 2 || head.front() != '[' || head.back() != ']')
      fail_at(file, lines[i].line_number,
              "BEGIN_SHELL requires the interpreter in brackets");
    ShellBlock block;
    block.interpreter = trimmed(head.substr(1, head.size() - 2));
    if (block.interpreter.empty())
      fail_at(file, lines[i].line_number, "empty interpreter in BEGIN_SHELL");
    block.file = file;
    block.line = lines[i].line_number;

    size_t j = i + 1;
    std::ostringstream body;
    for (; j < lines.size(); ++j) {
      if (match_directive(lines[j].text, "end_shell", nullptr))
        break;
      body << lines[j].text << "\n";
    }
    if (j == lines.size())
      fail_at(file, lines[i].line_number, "unterminated BEGIN_SHELL block");
    block.script_body = body.str();

    std::string produced = run_shell_block(block, workdir, timeout_seconds, cache);
    std::istringstream ss(produced);
    std::string pl;
    std::vector<std::string> spliced_physical;
    while (std::getline(ss, pl))
      spliced_physical.push_back(pl);
    // spliced text may use continuations of its own
    for (auto &rl : join_continuations(spliced_physical, file)) {
      if (match_directive(rl.text, "begin_shell", nullptr))
        fail_at(file, block.line,
                "embedded script output contains BEGIN_SHELL (not expanded recursively)");
      rl.line_number = block.line; // map spliced lines back to the block
      out.push_back(rl);
    }
    i = j; // skip past END_SHELL
  }
  return out;
}

} // namespace irpx
