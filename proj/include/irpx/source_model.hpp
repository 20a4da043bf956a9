#ifndef IRPX_SOURCE_MODEL_HPP
#define IRPX_SOURCE_MODEL_HPP

#include <string>
#include <vector>

namespace irpx {

enum class LineKind {
  ProviderBegin,
  ProviderBeginCont,
  ProviderEnd,
  DocBegin,
  DocEnd,
  DocText,
  ShellBegin,
  ShellEnd,
  Assert,
  Touch,
  Free,
  Provide,
  IrpRead,
  IrpWrite,
  IrpIf,
  IrpElse,
  IrpEndif,
  SubroutineBegin,
  FunctionBegin,
  ProgramBegin,
  UnitEnd,
  Declaration,
  Use,
  Simple,
};

const char *to_string(LineKind k);

// A logical line before classification: continuations already joined,
// line_number is the first physical line of the join.
struct RawLine {
  std::string text;
  int line_number = 0;
};

// A classified logical line. masked_text blanks string-literal contents
// and comments but keeps every other character at its original position.
struct SourceLine {
  std::string file;
  int line_number = 0;
  LineKind kind = LineKind::Simple;
  std::string text;
  std::string masked_text;
};

// One entity declared by a provider block header.
struct EntityDecl {
  std::string name;         // lower-case canonical form
  std::string display_name; // as written in the source
  std::string fortran_type; // opaque, e.g. "double precision"
  std::vector<std::string> dims; // empty = scalar
  std::string doc;
  std::string group_id; // name of the first entity of the block
  std::string file;
  int line = 0;
};

enum class UnitKind { Provider, Subroutine, Function, Program };

struct Unit {
  UnitKind kind = UnitKind::Provider;
  std::string name; // lower-case; for providers, first declared entity
  std::string display_name;
  std::string file;
  int line = 0;
  std::vector<EntityDecl> declared_entities; // providers only
  std::vector<SourceLine> body;              // between header and end marker
  std::vector<SourceLine> locals;            // Declaration lines of the body
};

// Joins free-form `&` continuations. Lines inside BEGIN_SHELL blocks are
// left untouched (an ampersand there belongs to the script).
std::vector<RawLine> join_continuations(const std::vector<std::string> &physical,
                                        const std::string &file);

std::vector<RawLine> read_raw_lines(const std::string &path);

// Blanks comment text and string-literal contents; quotes themselves and
// everything else stay put, so column positions survive for diagnostics.
std::string mask_comments_strings(const std::string &logical_line,
                                  const std::string &file = "<input>",
                                  int line_number = 0);

LineKind classify_line(const std::string &masked_text);

// Classifies a whole file. Lines between BEGIN_DOC and END_DOC become
// DocText and are never masked (doc prose may contain stray quotes).
std::vector<SourceLine> classify_lines(const std::vector<RawLine> &raw,
                                       const std::string &file);

// Parses `BEGIN_PROVIDER [ type, name ]` or
// `BEGIN_PROVIDER [ type, name, (d1,d2) ]`, plus the `&BEGIN_PROVIDER`
// continuation form.
EntityDecl parse_provider_header(const SourceLine &line);

std::vector<Unit> parse_units(const std::vector<SourceLine> &lines);

std::string lower(std::string s);

} // namespace irpx

#endif
