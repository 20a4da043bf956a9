#include "irpx/source_model.hpp"
#include "irpx/diag.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

namespace irpx {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

const char *to_string(LineKind k) {
  switch (k) {
  case LineKind::ProviderBegin: return "ProviderBegin";
  case LineKind::ProviderBeginCont: return "ProviderBeginCont";
  case LineKind::ProviderEnd: return "ProviderEnd";
  case LineKind::DocBegin: return "DocBegin";
  case LineKind::DocEnd: return "DocEnd";
  case LineKind::DocText: return "DocText";
  case LineKind::ShellBegin: return "ShellBegin";
  case LineKind::ShellEnd: return "ShellEnd";
  case LineKind::Assert: return "Assert";
  case LineKind::Touch: return "Touch";
  case LineKind::Free: return "Free";
  case LineKind::Provide: return "Provide";
  case LineKind::IrpRead: return "IrpRead";
  case LineKind::IrpWrite: return "IrpWrite";
  case LineKind::IrpIf: return "IrpIf";
  case LineKind::IrpElse: return "IrpElse";
  case LineKind::IrpEndif: return "IrpEndif";
  case LineKind::SubroutineBegin: return "SubroutineBegin";
  case LineKind::FunctionBegin: return "FunctionBegin";
  case LineKind::ProgramBegin: return "ProgramBegin";
  case LineKind::UnitEnd: return "UnitEnd";
  case LineKind::Declaration: return "Declaration";
  case LineKind::Use: return "Use";
  case LineKind::Simple: return "Simple";
  }
  return "?";
}

namespace {

std::string trimmed(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool starts_with_kw(const std::string &lt, const std::string &kw) {
  if (lt.rfind(kw, 0) != 0)
    return false;
  if (lt.size() == kw.size())
    return true;
  char c = lt[kw.size()];
  return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_');
}

// Position of the continuation ampersand, or npos. Only a trailing `&`
// outside strings and comments continues a line.
size_t continuation_pos(const std::string &line) {
  char in_string = 0;
  size_t last_amp = std::string::npos;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == in_string) {
        if (i + 1 < line.size() && line[i + 1] == in_string)
          ++i; // doubled quote
        else
          in_string = 0;
      }
    } else if (c == '\'' || c == '"') {
      in_string = c;
    } else if (c == '!') {
      break; // comment: no continuation possible past here
    } else if (c == '&') {
      last_amp = i;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      last_amp = std::string::npos;
    }
  }
  return last_amp;
}

bool is_shell_begin(const std::string &line) {
  return starts_with_kw(lower(trimmed(line)), "begin_shell");
}
bool is_shell_end(const std::string &line) {
  return starts_with_kw(lower(trimmed(line)), "end_shell");
}

} // namespace

std::vector<RawLine> join_continuations(const std::vector<std::string> &physical,
                                        const std::string &file) {
  std::vector<RawLine> out;
  bool in_shell = false;
  for (size_t i = 0; i < physical.size(); ++i) {
    std::string text = physical[i];
    if (!text.empty() && text.back() == '\r')
      text.pop_back();
    int first_line = static_cast<int>(i) + 1;

    if (in_shell) {
      if (is_shell_end(text))
        in_shell = false;
      out.push_back({text, first_line});
      continue;
    }
    if (is_shell_begin(text)) {
      in_shell = true;
      out.push_back({text, first_line});
      continue;
    }

    size_t amp = continuation_pos(text);
    while (amp != std::string::npos) {
      if (i + 1 >= physical.size())
        fail_at(file, static_cast<int>(i) + 1,
                "file ends inside a continuation");
      std::string next = physical[++i];
      if (!next.empty() && next.back() == '\r')
        next.pop_back();
      // drop trailing '&' plus surrounding blanks, splice the next line
      text.erase(amp);
      while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.pop_back();
      std::string rhs = trimmed(next);
      if (!rhs.empty() && rhs.front() == '&')
        rhs = trimmed(rhs.substr(1));
      text += " " + rhs;
      amp = continuation_pos(text);
    }
    out.push_back({text, first_line});
  }
  return out;
}

std::vector<RawLine> read_raw_lines(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IrpError("cannot open " + path, 2);
  std::vector<std::string> physical;
  std::string line;
  while (std::getline(in, line))
    physical.push_back(line);
  return join_continuations(physical, path);
}

std::string mask_comments_strings(const std::string &line,
                                  const std::string &file, int line_number) {
  std::string out = line;
  char in_string = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    if (in_string) {
      if (c == in_string) {
        if (i + 1 < out.size() && out[i + 1] == in_string) {
          out[i] = ' ';
          out[i + 1] = ' ';
          ++i;
        } else {
          in_string = 0; // closing quote kept
        }
      } else {
        out[i] = ' ';
      }
    } else if (c == '\'' || c == '"') {
      in_string = c; // opening quote kept
    } else if (c == '!') {
      std::fill(out.begin() + i, out.end(), ' ');
      break;
    }
  }
  if (in_string)
    fail_at(file, line_number, "unterminated string literal");
  return out;
}

LineKind classify_line(const std::string &masked_text) {
  const std::string lt = lower(trimmed(masked_text));
  if (lt.empty())
    return LineKind::Simple;

  if (starts_with_kw(lt, "&begin_provider"))
    return LineKind::ProviderBeginCont;
  if (lt[0] == '&' && starts_with_kw(lower(trimmed(lt.substr(1))), "begin_provider"))
    return LineKind::ProviderBeginCont;
  if (starts_with_kw(lt, "begin_provider"))
    return LineKind::ProviderBegin;
  if (starts_with_kw(lt, "end_provider"))
    return LineKind::ProviderEnd;
  if (starts_with_kw(lt, "begin_doc"))
    return LineKind::DocBegin;
  if (starts_with_kw(lt, "end_doc"))
    return LineKind::DocEnd;
  if (starts_with_kw(lt, "begin_shell"))
    return LineKind::ShellBegin;
  if (starts_with_kw(lt, "end_shell"))
    return LineKind::ShellEnd;
  if (starts_with_kw(lt, "assert"))
    return LineKind::Assert;
  if (starts_with_kw(lt, "touch"))
    return LineKind::Touch;
  if (starts_with_kw(lt, "free"))
    return LineKind::Free;
  if (starts_with_kw(lt, "provide"))
    return LineKind::Provide;
  if (starts_with_kw(lt, "irp_read"))
    return LineKind::IrpRead;
  if (starts_with_kw(lt, "irp_write"))
    return LineKind::IrpWrite;
  if (starts_with_kw(lt, "irp_if"))
    return LineKind::IrpIf;
  if (starts_with_kw(lt, "irp_else"))
    return LineKind::IrpElse;
  if (starts_with_kw(lt, "irp_endif"))
    return LineKind::IrpEndif;
  if (starts_with_kw(lt, "use"))
    return LineKind::Use;

  static const std::regex program_re(R"(^program\s+[a-z_]\w*\s*$)");
  static const std::regex subroutine_re(
      R"(^((pure|elemental|recursive)\s+)*subroutine\s+[a-z_]\w*)");
  static const std::regex function_re(
      R"(^((pure|elemental|recursive)\s+)*((integer|real|logical|complex|character|double\s+precision)(\s*\([^)]*\))?\s+)?function\s+[a-z_]\w*\s*\()");
  static const std::regex end_re(R"(^end(\s+(program|subroutine|function)\b.*)?\s*$)");

  if (std::regex_match(lt, program_re))
    return LineKind::ProgramBegin;
  if (std::regex_search(lt, subroutine_re))
    return LineKind::SubroutineBegin;
  if (lt.find("function") != std::string::npos &&
      std::regex_search(lt, function_re))
    return LineKind::FunctionBegin;
  if (std::regex_match(lt, end_re))
    return LineKind::UnitEnd;
  if (lt.find("::") != std::string::npos)
    return LineKind::Declaration;
  return LineKind::Simple;
}

std::vector<SourceLine> classify_lines(const std::vector<RawLine> &raw,
                                       const std::string &file) {
  std::vector<SourceLine> out;
  out.reserve(raw.size());
  bool in_doc = false;
  for (const auto &r : raw) {
    SourceLine sl;
    sl.file = file;
    sl.line_number = r.line_number;
    sl.text = r.text;
    if (in_doc) {
      if (classify_line(r.text) == LineKind::DocEnd) {
        sl.kind = LineKind::DocEnd;
        sl.masked_text = r.text;
        in_doc = false;
      } else {
        sl.kind = LineKind::DocText;
        sl.masked_text = r.text; // doc prose, never masked
      }
    } else {
      sl.masked_text = mask_comments_strings(r.text, file, r.line_number);
      sl.kind = classify_line(sl.masked_text);
      if (sl.kind == LineKind::DocBegin)
        in_doc = true;
    }
    out.push_back(std::move(sl));
  }
  if (in_doc)
    fail_at(file, raw.empty() ? 0 : raw.back().line_number,
            "unterminated BEGIN_DOC block");
  return out;
}

EntityDecl parse_provider_header(const SourceLine &line) {
  std::string t = trimmed(line.text);
  if (!t.empty() && t.front() == '&')
    t = trimmed(t.substr(1));
  // strip the keyword
  const std::string kw = "begin_provider";
  if (lower(t).rfind(kw, 0) != 0)
    fail_at(line.file, line.line_number, "not a provider header: " + line.text);
  t = trimmed(t.substr(kw.size()));
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    fail_at(line.file, line.line_number,
            "malformed provider header, expected [ type, name ]");
  t = t.substr(1, t.size() - 2);

  // split on top-level commas: type, name [, (dims)]
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : t) {
    if (c == '(')
      ++depth;
    else if (c == ')')
      --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(trimmed(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trimmed(cur));
  if (depth != 0)
    fail_at(line.file, line.line_number, "unbalanced parentheses in provider header");
  if (parts.size() < 2 || parts.size() > 3)
    fail_at(line.file, line.line_number,
            "provider header must be [ type, name ] or [ type, name, (dims) ]");

  EntityDecl decl;
  decl.fortran_type = parts[0];
  decl.display_name = parts[1];
  decl.name = lower(parts[1]);
  decl.file = line.file;
  decl.line = line.line_number;
  if (decl.fortran_type.empty())
    fail_at(line.file, line.line_number, "missing type in provider header");
  static const std::regex ident_re(R"(^[A-Za-z_]\w*$)");
  if (!std::regex_match(decl.display_name, ident_re))
    fail_at(line.file, line.line_number,
            "missing or invalid entity name in provider header");

  if (parts.size() == 3) {
    std::string d = parts[2];
    if (d.size() < 2 || d.front() != '(' || d.back() != ')')
      fail_at(line.file, line.line_number, "dimensions must be parenthesized");
    d = d.substr(1, d.size() - 2);
    int pd = 0;
    std::string dim;
    auto push_dim = [&] {
      std::string v = trimmed(dim);
      if (v.empty())
        fail_at(line.file, line.line_number, "empty dimension expression");
      decl.dims.push_back(v);
      dim.clear();
    };
    for (char c : d) {
      if (c == '(')
        ++pd;
      else if (c == ')')
        --pd;
      if (c == ',' && pd == 0)
        push_dim();
      else
        dim += c;
    }
    push_dim();
  }
  return decl;
}

std::vector<Unit> parse_units(const std::vector<SourceLine> &lines) {
  std::vector<Unit> units;
  Unit cur;
  bool in_unit = false;
  bool in_doc = false;
  std::string doc_acc;
  int header_line = 0;

  auto finish_provider_doc = [&] {
    if (!doc_acc.empty()) {
      for (auto &e : cur.declared_entities)
        e.doc = doc_acc;
      doc_acc.clear();
    }
  };

  for (size_t i = 0; i < lines.size(); ++i) {
    const SourceLine &sl = lines[i];
    switch (sl.kind) {
    case LineKind::ProviderBegin: {
      if (in_unit)
        fail_at(sl.file, sl.line_number, "provider blocks do not nest");
      in_unit = true;
      cur = Unit{};
      cur.kind = UnitKind::Provider;
      cur.file = sl.file;
      cur.line = sl.line_number;
      header_line = sl.line_number;
      EntityDecl d = parse_provider_header(sl);
      cur.name = d.name;
      cur.display_name = d.display_name;
      d.group_id = cur.name;
      cur.declared_entities.push_back(std::move(d));
      break;
    }
    case LineKind::ProviderBeginCont: {
      if (!in_unit || cur.kind != UnitKind::Provider ||
          !cur.body.empty())
        fail_at(sl.file, sl.line_number,
                "&BEGIN_PROVIDER must directly follow a provider header");
      EntityDecl d = parse_provider_header(sl);
      d.group_id = cur.name;
      cur.declared_entities.push_back(std::move(d));
      break;
    }
    case LineKind::ProviderEnd:
      if (!in_unit || cur.kind != UnitKind::Provider)
        fail_at(sl.file, sl.line_number, "END_PROVIDER without BEGIN_PROVIDER");
      if (in_doc)
        fail_at(sl.file, sl.line_number, "END_PROVIDER inside BEGIN_DOC block");
      finish_provider_doc();
      units.push_back(cur);
      in_unit = false;
      break;
    case LineKind::SubroutineBegin:
    case LineKind::FunctionBegin:
    case LineKind::ProgramBegin: {
      if (in_unit)
        fail_at(sl.file, sl.line_number, "program units do not nest");
      in_unit = true;
      cur = Unit{};
      cur.kind = sl.kind == LineKind::SubroutineBegin ? UnitKind::Subroutine
                 : sl.kind == LineKind::FunctionBegin ? UnitKind::Function
                                                      : UnitKind::Program;
      cur.file = sl.file;
      cur.line = sl.line_number;
      header_line = sl.line_number;
      static const std::regex name_re(R"((subroutine|function|program)\s+([A-Za-z_]\w*))",
                                      std::regex::icase);
      std::smatch m;
      if (std::regex_search(sl.text, m, name_re)) {
        cur.display_name = m[2];
        cur.name = lower(m[2]);
      } else {
        fail_at(sl.file, sl.line_number, "cannot parse unit name");
      }
      cur.body.push_back(sl); // keep the header for rewriting
      break;
    }
    case LineKind::UnitEnd:
      if (!in_unit || cur.kind == UnitKind::Provider)
        fail_at(sl.file, sl.line_number, "unexpected end of unit");
      cur.body.push_back(sl);
      units.push_back(cur);
      in_unit = false;
      break;
    case LineKind::DocBegin:
      if (!in_unit || cur.kind != UnitKind::Provider)
        fail_at(sl.file, sl.line_number, "BEGIN_DOC outside a provider");
      in_doc = true;
      cur.body.push_back(sl);
      break;
    case LineKind::DocEnd:
      in_doc = false;
      cur.body.push_back(sl);
      break;
    case LineKind::DocText:
      doc_acc += trimmed(sl.text);
      doc_acc += "\n";
      cur.body.push_back(sl);
      break;
    case LineKind::ShellBegin:
    case LineKind::ShellEnd:
      fail_at(sl.file, sl.line_number,
              "shell block survived directive expansion");
    default:
      if (!in_unit) {
        if (!trimmed(sl.masked_text).empty())
          fail_at(sl.file, sl.line_number, "statement outside any program unit");
        break; // blank lines and comments between units are fine
      }
      cur.body.push_back(sl);
      if (sl.kind == LineKind::Declaration)
        cur.locals.push_back(sl);
      break;
    }
  }
  if (in_unit) {
    if (cur.kind == UnitKind::Provider)
      fail_at(cur.file, header_line, "unterminated provider '" + cur.display_name + "'");
    fail_at(cur.file, header_line, "unterminated unit '" + cur.display_name + "'");
  }
  (void)header_line;
  return units;
}

} // namespace irpx
