// Copyright 2026 The nqasm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nqasm/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <set>
#include <sstream>

#include "nqasm/error.hpp"

namespace nqasm {

std::string to_string(const Diagnostic& diagnostic) {
  std::string out =
      diagnostic.severity == Severity::kError ? "error" : "warning";
  if (diagnostic.instruction >= 0) {
    out += " [" + std::to_string(diagnostic.instruction) + "]";
  }
  out += " " + diagnostic.code;
  if (!diagnostic.message.empty()) out += ": " + diagnostic.message;
  return out;
}

namespace assembler {

namespace {

using isa::Address;
using isa::ArrayEntry;
using isa::ArraySlice;
using isa::Immediate;
using isa::IndexOperand;
using isa::Operand;
using isa::OperandKind;
using isa::RegisterRef;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::int32_t to_int32(std::int64_t v, int line) {
  if (v < std::numeric_limits<std::int32_t>::min() ||
      v > std::numeric_limits<std::int32_t>::max()) {
    throw Error(ErrorCode::kSyntaxError,
                "integer " + std::to_string(v) + " does not fit in int32",
                line);
  }
  return static_cast<std::int32_t>(v);
}

void parse_version(std::string_view text, isa::Version& out, int line) {
  const auto dot = text.find('.');
  const auto major = parse_int(text.substr(0, dot));
  const auto minor =
      dot == std::string_view::npos ? std::optional<std::int64_t>(0)
                                    : parse_int(text.substr(dot + 1));
  if (!major || !minor || *major < 0 || *major > 255 || *minor < 0 ||
      *minor > 255) {
    throw Error(ErrorCode::kMalformedDirective,
                "bad NETQASM version '" + std::string(text) + "'", line);
  }
  out.major = static_cast<std::uint8_t>(*major);
  out.minor = static_cast<std::uint8_t>(*minor);
}

std::string expand_macros(std::string_view text,
                          const std::map<std::string, std::string>& defines,
                          int line) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] != '$') {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && is_ident_char(text[j])) ++j;
    const std::string key(text.substr(i + 1, j - i - 1));
    const auto it = defines.find(key);
    if (key.empty() || it == defines.end()) {
      throw Error(ErrorCode::kUndefinedMacro, "$" + key, line);
    }
    out += it->second;
    i = j;
  }
  return out;
}

}  // namespace

std::string Preprocessed::body_text() const {
  std::string out;
  for (const auto& l : body) {
    out += l.text;
    out += '\n';
  }
  return out;
}

Preprocessed preprocess(std::string_view source) {
  Preprocessed result;
  std::map<std::string, std::string> defines;
  bool seen_version = false;
  bool seen_app_id = false;
  bool body_started = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    const std::size_t eol = std::min(source.find('\n', pos), source.size());
    std::string_view raw = source.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (const auto c = raw.find("//"); c != std::string_view::npos) {
      raw = raw.substr(0, c);
    }
    const std::string_view text = trim(raw);
    if (text.empty()) {
      if (eol == source.size()) break;
      continue;
    }

    if (text.front() == '#') {
      if (body_started) {
        throw Error(ErrorCode::kDirectiveOrder,
                    "directive after the first instruction", line_no);
      }
      std::string_view rest = trim(text.substr(1));
      const auto space = rest.find_first_of(" \t");
      const std::string_view keyword = rest.substr(0, space);
      const std::string_view arg =
          space == std::string_view::npos ? std::string_view{}
                                          : trim(rest.substr(space));
      if (keyword == "NETQASM") {
        if (seen_version) {
          throw Error(ErrorCode::kMalformedDirective, "duplicate NETQASM",
                      line_no);
        }
        parse_version(arg, result.metadata.version, line_no);
        seen_version = true;
      } else if (keyword == "APPID") {
        if (seen_app_id) {
          throw Error(ErrorCode::kMalformedDirective, "duplicate APPID",
                      line_no);
        }
        const auto id = parse_int(arg);
        if (!id) {
          throw Error(ErrorCode::kMalformedDirective,
                      "bad APPID '" + std::string(arg) + "'", line_no);
        }
        result.metadata.app_id = to_int32(*id, line_no);
        seen_app_id = true;
      } else if (keyword == "DEFINE") {
        const auto ks = arg.find_first_of(" \t");
        const std::string key(arg.substr(0, ks));
        std::string_view value =
            ks == std::string_view::npos ? std::string_view{}
                                         : trim(arg.substr(ks));
        if (!value.empty() && value.front() == '{') {
          if (value.back() != '}') {
            throw Error(ErrorCode::kMalformedDirective,
                        "unterminated {} in DEFINE", line_no);
          }
          value = trim(value.substr(1, value.size() - 2));
        } else if (value.find_first_of(" \t") != std::string_view::npos) {
          throw Error(ErrorCode::kMalformedDirective,
                      "DEFINE values with spaces must be enclosed in {}",
                      line_no);
        }
        if (key.empty() ||
            !std::all_of(key.begin(), key.end(), is_ident_char)) {
          throw Error(ErrorCode::kMalformedDirective,
                      "bad DEFINE key '" + key + "'", line_no);
        }
        if (value.empty()) {
          throw Error(ErrorCode::kMalformedDirective,
                      "DEFINE " + key + " has no value", line_no);
        }
        if (!defines.emplace(key, std::string(value)).second) {
          throw Error(ErrorCode::kMalformedDirective,
                      "duplicate DEFINE " + key, line_no);
        }
        result.metadata.defines.emplace_back(key, std::string(value));
      } else if (keyword == "FLAVOR") {
        const auto flavor = isa::parse_flavor(arg);
        if (!flavor || *flavor == isa::Flavor::kCore) {
          throw Error(ErrorCode::kMalformedDirective,
                      "unknown flavor '" + std::string(arg) + "'", line_no);
        }
        result.metadata.flavor = *flavor;
      } else {
        throw Error(ErrorCode::kMalformedDirective,
                    "unknown directive '" + std::string(keyword) + "'",
                    line_no);
      }
    } else {
      body_started = true;
      result.body.push_back(
          SourceLine{line_no, expand_macros(text, defines, line_no)});
    }
    if (eol == source.size()) break;
  }

  if (!seen_version) {
    throw Error(ErrorCode::kMissingDirective, "# NETQASM is required");
  }
  if (!seen_app_id) {
    throw Error(ErrorCode::kMissingDirective, "# APPID is required");
  }
  return result;
}

namespace {

// Parses "C3" style tokens. Returns nullopt when the token does not have the
// letter-digits shape at all.
std::optional<RegisterRef> parse_register_token(std::string_view tok,
                                                int line) {
  if (tok.size() < 2 || !std::isalpha(static_cast<unsigned char>(tok[0]))) {
    return std::nullopt;
  }
  const auto index = parse_int(tok.substr(1));
  if (!index || !std::isdigit(static_cast<unsigned char>(tok[1]))) {
    return std::nullopt;
  }
  try {
    return isa::make_register(tok[0], static_cast<int>(*index));
  } catch (const Error& e) {
    throw Error(e.code(), "'" + std::string(tok) + "'", line);
  }
}

IndexOperand parse_index(std::string_view tok, int line) {
  if (const auto v = parse_int(tok)) return Immediate{to_int32(*v, line)};
  if (auto reg = parse_register_token(tok, line)) return *reg;
  throw Error(ErrorCode::kSyntaxError,
              "bad array index '" + std::string(tok) + "'", line);
}

Operand parse_array_operand(std::string_view tok, int line) {
  const auto open = tok.find('[');
  const auto addr = parse_int(tok.substr(1, open == std::string_view::npos
                                                ? std::string_view::npos
                                                : open - 1));
  if (!addr) {
    throw Error(ErrorCode::kSyntaxError,
                "bad address '" + std::string(tok) + "'", line);
  }
  const Address address{to_int32(*addr, line)};
  if (open == std::string_view::npos) return address;
  if (tok.back() != ']') {
    throw Error(ErrorCode::kSyntaxError,
                "unterminated '[' in '" + std::string(tok) + "'", line);
  }
  const std::string_view inner = tok.substr(open + 1, tok.size() - open - 2);
  const auto colon = inner.find(':');
  if (colon == std::string_view::npos) {
    return ArrayEntry{address, parse_index(inner, line)};
  }
  return ArraySlice{address, parse_index(inner.substr(0, colon), line),
                    parse_index(inner.substr(colon + 1), line)};
}

SymbolicOperand parse_operand(std::string_view tok, bool branch_slot,
                              int line) {
  if (const auto v = parse_int(tok)) return Operand{Immediate{to_int32(*v, line)}};
  if (tok.front() == '@') return parse_array_operand(tok, line);
  if (branch_slot && is_identifier(tok)) {
    if (tok.size() >= 2 && std::string_view("CRQM").find(tok[0]) !=
                               std::string_view::npos &&
        std::all_of(tok.begin() + 1, tok.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      // A register where a branch target is required.
      return Operand{*parse_register_token(tok, line)};
    }
    return LabelRef{std::string(tok)};
  }
  if (auto reg = parse_register_token(tok, line)) return Operand{*reg};
  throw Error(ErrorCode::kSyntaxError,
              "cannot parse operand '" + std::string(tok) + "'", line);
}

bool accepts(OperandKind want, const SymbolicOperand& op, bool branch_slot) {
  if (std::holds_alternative<LabelRef>(op)) return branch_slot;
  const OperandKind have = isa::kind_of(std::get<Operand>(op));
  if (have == want) return true;
  return want == OperandKind::kRegister &&
         (have == OperandKind::kImmediate || have == OperandKind::kAddress);
}

}  // namespace

SymbolicSubroutine parse(const Preprocessed& source) {
  SymbolicSubroutine out;
  out.metadata = source.metadata;
  const auto& registry = isa::Registry::instance();

  for (const auto& line : source.body) {
    auto tokens = split_ws(line.text);
    std::size_t first = 0;
    while (first < tokens.size() && tokens[first].size() > 1 &&
           tokens[first].back() == ':') {
      const std::string name = tokens[first].substr(0, tokens[first].size() - 1);
      if (!is_identifier(name)) {
        throw Error(ErrorCode::kSyntaxError, "bad label '" + name + "'",
                    line.line);
      }
      if (!out.labels.emplace(name, out.instructions.size()).second) {
        throw Error(ErrorCode::kDuplicateLabel, name, line.line);
      }
      ++first;
    }
    if (first == tokens.size()) continue;

    const std::string& name = tokens[first];
    const isa::OpcodeInfo* meta = registry.find(name, source.metadata.flavor);
    if (meta == nullptr) {
      throw Error(ErrorCode::kUnknownMnemonic, "'" + name + "'", line.line);
    }
    const std::size_t argc = tokens.size() - first - 1;
    if (argc != meta->signature.size()) {
      throw Error(ErrorCode::kSignatureMismatch,
                  name + " expects " + std::to_string(meta->signature.size()) +
                      " operands, got " + std::to_string(argc),
                  line.line);
    }
    SymbolicInstruction instr{meta->opcode, {}, line.line};
    for (std::size_t k = 0; k < argc; ++k) {
      const bool branch_slot = static_cast<int>(k) == meta->branch_target;
      auto op = parse_operand(tokens[first + 1 + k], branch_slot, line.line);
      if (!accepts(meta->signature[k], op, branch_slot)) {
        throw Error(ErrorCode::kSignatureMismatch,
                    name + " operand " + std::to_string(k) + " must be " +
                        std::string(isa::to_string(meta->signature[k])),
                    line.line);
      }
      instr.operands.push_back(std::move(op));
    }
    out.instructions.push_back(std::move(instr));
  }
  return out;
}

namespace {

void collect_registers(const Operand& op, std::set<RegisterRef>& out) {
  auto index = [&out](const IndexOperand& idx) {
    if (const auto* r = std::get_if<RegisterRef>(&idx)) out.insert(*r);
  };
  if (const auto* r = std::get_if<RegisterRef>(&op)) out.insert(*r);
  if (const auto* e = std::get_if<ArrayEntry>(&op)) index(e->index);
  if (const auto* s = std::get_if<ArraySlice>(&op)) {
    index(s->start);
    index(s->stop);
  }
}

class ScratchAllocator {
 public:
  explicit ScratchAllocator(const std::set<RegisterRef>& busy) : busy_(busy) {}

  RegisterRef next(int line) {
    while (cursor_ >= 0) {
      const RegisterRef reg{isa::RegName::kR,
                            static_cast<std::uint8_t>(cursor_--)};
      if (!busy_.contains(reg)) {
        if (kFirstScratchIndex - reg.index >= kScratchCount) break;
        return reg;
      }
    }
    throw Error(ErrorCode::kSignatureMismatch,
                "too many operands to lower into scratch registers", line);
  }

 private:
  const std::set<RegisterRef>& busy_;
  int cursor_ = kFirstScratchIndex;
};

isa::Instruction make_set(RegisterRef reg, std::int32_t value) {
  return {isa::Opcode::kSet, {reg, Immediate{value}}};
}

}  // namespace

isa::Subroutine resolve(const SymbolicSubroutine& sym,
                        const ResolveOptions& options, ResolveReport* report) {
  ResolveReport local;
  ResolveReport& rep = report != nullptr ? *report : local;
  const std::size_t n = sym.instructions.size();

  for (const auto& [name, index] : sym.labels) {
    if (index > n) {
      throw Error(ErrorCode::kBranchOutOfRange, "label " + name);
    }
  }

  // Pass 1: lower operands and record where each source instruction starts.
  std::vector<isa::Instruction> out;
  std::vector<std::size_t> new_index(n + 1, 0);
  std::vector<std::optional<SymbolicOperand>> targets;  // per output instr
  std::set<RegisterRef> scratch_used;
  std::set<RegisterRef> user_registers;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = sym.instructions[i];
    const auto& meta = isa::Registry::instance().info(src.opcode);
    new_index[i] = out.size();

    std::set<RegisterRef> busy;
    for (const auto& op : src.operands) {
      if (const auto* o = std::get_if<Operand>(&op)) collect_registers(*o, busy);
    }
    user_registers.insert(busy.begin(), busy.end());
    ScratchAllocator scratch(busy);

    isa::Instruction lowered{src.opcode, {}};
    std::optional<SymbolicOperand> target;
    for (std::size_t k = 0; k < src.operands.size(); ++k) {
      const auto& op = src.operands[k];
      if (static_cast<int>(k) == meta.branch_target) {
        target = op;
        lowered.operands.push_back(Immediate{0});  // patched in pass 2
        continue;
      }
      Operand value = std::get<Operand>(op);
      if (options.lower_operands) {
        const OperandKind want = meta.signature[k];
        auto lower_index = [&](IndexOperand& idx) {
          if (const auto* imm = std::get_if<Immediate>(&idx)) {
            const RegisterRef reg = scratch.next(src.line);
            out.push_back(make_set(reg, imm->value));
            targets.emplace_back();
            ++rep.set_insertions;
            scratch_used.insert(reg);
            idx = reg;
          }
        };
        if (want == OperandKind::kRegister) {
          if (const auto* imm = std::get_if<Immediate>(&value)) {
            const RegisterRef reg = scratch.next(src.line);
            out.push_back(make_set(reg, imm->value));
            targets.emplace_back();
            ++rep.set_insertions;
            scratch_used.insert(reg);
            value = reg;
          } else if (const auto* addr = std::get_if<Address>(&value)) {
            const RegisterRef reg = scratch.next(src.line);
            out.push_back({isa::Opcode::kLea, {reg, *addr}});
            targets.emplace_back();
            ++rep.lea_insertions;
            scratch_used.insert(reg);
            value = reg;
          }
        } else if (auto* e = std::get_if<ArrayEntry>(&value)) {
          lower_index(e->index);
        } else if (auto* s = std::get_if<ArraySlice>(&value)) {
          lower_index(s->start);
          lower_index(s->stop);
        }
      }
      lowered.operands.push_back(std::move(value));
    }
    out.push_back(std::move(lowered));
    targets.push_back(std::move(target));
  }
  new_index[n] = out.size();

  // Pass 2: branch targets, computed after every insertion.
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!targets[j]) continue;
    const auto& meta = isa::Registry::instance().info(out[j].opcode);
    std::size_t resolved = 0;
    if (const auto* label = std::get_if<LabelRef>(&*targets[j])) {
      const auto it = sym.labels.find(label->name);
      if (it == sym.labels.end()) {
        throw Error(ErrorCode::kUndefinedLabel, label->name);
      }
      resolved = new_index[it->second];
    } else {
      const auto& op = std::get<Operand>(*targets[j]);
      const auto* imm = std::get_if<Immediate>(&op);
      if (imm == nullptr) {
        throw Error(ErrorCode::kSignatureMismatch,
                    "branch target must be an immediate or label");
      }
      if (imm->value < 0 || static_cast<std::size_t>(imm->value) > n) {
        throw Error(ErrorCode::kBranchOutOfRange,
                    "branch target " + std::to_string(imm->value));
      }
      resolved = new_index[static_cast<std::size_t>(imm->value)];
    }
    out[j].operands[static_cast<std::size_t>(meta.branch_target)] =
        Immediate{static_cast<std::int32_t>(resolved)};
  }

  for (const auto& reg : scratch_used) {
    if (user_registers.contains(reg)) {
      rep.warnings.push_back(Diagnostic{
          Severity::kWarning, -1, "ReservedRegister",
          isa::to_string(reg) +
              " is used by the program and as a lowering scratch register"});
    }
  }

  isa::Subroutine sub;
  sub.version = sym.metadata.version;
  sub.app_id = sym.metadata.app_id;
  sub.instructions = std::move(out);
  isa::check_subroutine(sub, /*allow_text_form=*/!options.lower_operands);
  return sub;
}

SymbolicSubroutine to_symbolic(const isa::Subroutine& sub) {
  SymbolicSubroutine sym;
  sym.metadata.version = sub.version;
  sym.metadata.app_id = sub.app_id;
  const isa::Flavor flavor = isa::subroutine_flavor(sub);
  if (flavor != isa::Flavor::kCore) sym.metadata.flavor = flavor;
  for (const auto& instr : sub.instructions) {
    SymbolicInstruction s{instr.opcode, {}, 0};
    for (const auto& op : instr.operands) s.operands.emplace_back(op);
    sym.instructions.push_back(std::move(s));
  }
  return sym;
}

isa::Subroutine resolve(const isa::Subroutine& sub,
                        const ResolveOptions& options, ResolveReport* report) {
  return resolve(to_symbolic(sub), options, report);
}

std::string print(const isa::Subroutine& sub) {
  std::ostringstream out;
  out << "# NETQASM " << static_cast<int>(sub.version.major) << '.'
      << static_cast<int>(sub.version.minor) << '\n';
  out << "# APPID " << sub.app_id << '\n';
  if (isa::subroutine_flavor(sub) == isa::Flavor::kNv) out << "# FLAVOR nv\n";
  for (const auto& instr : sub.instructions) {
    out << isa::mnemonic(instr.opcode);
    for (const auto& op : instr.operands) out << ' ' << isa::to_string(op);
    out << '\n';
  }
  return out.str();
}

isa::Subroutine assemble(std::string_view source,
                         const ResolveOptions& options, ResolveReport* report) {
  return resolve(parse(preprocess(source)), options, report);
}

}  // namespace assembler
}  // namespace nqasm
