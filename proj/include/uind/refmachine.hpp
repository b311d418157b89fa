#ifndef UIND_REFMACHINE_HPP
#define UIND_REFMACHINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uind/bits.hpp"

namespace uind {

// The reference machine U: a stack machine over unbounded naturals with a
// fixed-width 3-bit opcode alphabet, self-delimiting via HALT. Programs are
// prefix-free by construction: decoding consumes opcodes up to the first
// HALT and nothing after it.
enum class Opcode : std::uint8_t {
  Zero = 0,     // push 0
  Inc = 1,      // top += 1
  Read = 2,     // push next input bit
  Dup = 3,      // duplicate top
  Out = 4,      // pop, emit top mod 2
  Loop = 5,     // if top == 0 jump past matching EndLoop (peek only)
  EndLoop = 6,  // jump back to matching Loop
  Halt = 7,     // stop
};

constexpr int kOpcodeBits = 3;
constexpr int kNonHaltOpcodes = 7;

inline const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Zero: return "ZERO";
    case Opcode::Inc: return "INC";
    case Opcode::Read: return "READ";
    case Opcode::Dup: return "DUP";
    case Opcode::Out: return "OUT";
    case Opcode::Loop: return "LOOP";
    case Opcode::EndLoop: return "ENDLOOP";
    case Opcode::Halt: return "HALT";
  }
  return "?";
}

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { IncompleteProgram, UnmatchedBracket };
  DecodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Jump table for Loop/EndLoop pairs. Throws UnmatchedBracket on failure.
inline std::vector<std::int32_t> build_bracket_map(std::span<const Opcode> ops) {
  std::vector<std::int32_t> match(ops.size(), -1);
  std::vector<std::int32_t> open;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i] == Opcode::Loop) {
      open.push_back(static_cast<std::int32_t>(i));
    } else if (ops[i] == Opcode::EndLoop) {
      if (open.empty())
        throw DecodeError(DecodeError::Kind::UnmatchedBracket, "ENDLOOP without matching LOOP");
      match[i] = open.back();
      match[open.back()] = static_cast<std::int32_t>(i);
      open.pop_back();
    }
  }
  if (!open.empty())
    throw DecodeError(DecodeError::Kind::UnmatchedBracket, "LOOP without matching ENDLOOP");
  return match;
}

// Cheap validity check used by the enumerator (no allocation, no throw).
inline bool brackets_balanced(std::span<const Opcode> ops) {
  int depth = 0;
  for (Opcode op : ops) {
    if (op == Opcode::Loop) ++depth;
    else if (op == Opcode::EndLoop && --depth < 0) return false;
  }
  return depth == 0;
}

struct Program {
  std::vector<Opcode> ops;          // includes the final Halt
  std::vector<std::int32_t> match;  // Loop <-> EndLoop indices, -1 elsewhere

  // Validates the single-Halt-at-end rule and the bracket pairing.
  static Program from_ops(std::vector<Opcode> ops) {
    if (ops.empty() || ops.back() != Opcode::Halt)
      throw DecodeError(DecodeError::Kind::IncompleteProgram, "program must end with HALT");
    for (std::size_t i = 0; i + 1 < ops.size(); ++i)
      if (ops[i] == Opcode::Halt)
        throw DecodeError(DecodeError::Kind::IncompleteProgram, "HALT before end of program");
    Program p;
    p.match = build_bracket_map(ops);
    p.ops = std::move(ops);
    return p;
  }

  std::size_t code_len() const { return kOpcodeBits * ops.size(); }

  Bits code() const {
    Bits out;
    out.reserve(code_len());
    for (Opcode op : ops) {
      auto v = static_cast<unsigned>(op);
      out.push_back(v & 4 ? '1' : '0');
      out.push_back(v & 2 ? '1' : '0');
      out.push_back(v & 1 ? '1' : '0');
    }
    return out;
  }

  bool reads_input() const {
    for (Opcode op : ops)
      if (op == Opcode::Read) return true;
    return false;
  }

  std::string mnemonic() const {
    std::string s;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (i) s += ' ';
      s += opcode_name(ops[i]);
    }
    return s;
  }
};

// Consumes 3-bit opcodes until the first HALT; trailing bits are left alone.
// consumed (when given) receives the number of bits belonging to the program.
inline Program decode_program(std::string_view bits, std::size_t* consumed = nullptr) {
  std::vector<Opcode> ops;
  std::size_t pos = 0;
  for (;;) {
    if (pos + kOpcodeBits > bits.size())
      throw DecodeError(DecodeError::Kind::IncompleteProgram, "bit stream ends before HALT");
    unsigned v = 0;
    for (int b = 0; b < kOpcodeBits; ++b) {
      char c = bits[pos + b];
      if (c != '0' && c != '1') throw std::invalid_argument("program code contains non-bit character");
      v = (v << 1) | static_cast<unsigned>(c - '0');
    }
    pos += kOpcodeBits;
    ops.push_back(static_cast<Opcode>(v));
    if (ops.back() == Opcode::Halt) break;
  }
  if (consumed) *consumed = pos;
  return Program::from_ops(std::move(ops));
}

// Total order for enumeration and tie-breaking: shorter code first, then
// lexicographic on code bits. For fixed-width opcodes the bit order equals
// numeric order on the opcode sequence, so (code_len, packed value) works.
struct CanonicalKey {
  std::uint32_t code_len = 0;
  std::uint64_t value = 0;  // opcodes packed MSB-first, 3 bits each

  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

inline CanonicalKey canonical_order_key(std::span<const Opcode> ops) {
  CanonicalKey k;
  k.code_len = static_cast<std::uint32_t>(kOpcodeBits * ops.size());
  for (Opcode op : ops) k.value = (k.value << kOpcodeBits) | static_cast<std::uint64_t>(op);
  return k;
}

inline CanonicalKey canonical_order_key(const Program& p) { return canonical_order_key(p.ops); }

enum class RunStatus : std::uint8_t { Halted, BudgetExhausted, OutputLimitReached, Fault };
enum class FaultKind : std::uint8_t { EmptyStackPop, InputExhausted };

inline const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Halted: return "halted";
    case RunStatus::BudgetExhausted: return "budget-exhausted";
    case RunStatus::OutputLimitReached: return "output-limit";
    case RunStatus::Fault: return "fault";
  }
  return "?";
}

struct RunResult {
  RunStatus status = RunStatus::Halted;
  Bits output;
  std::uint64_t steps_used = 0;
  std::optional<FaultKind> fault;
};

// Reusable interpreter workspace. Sharing one Machine across runs keeps the
// enumeration loops allocation-free; the machine itself holds no state
// between runs, so results only depend on (program, input, budgets).
class Machine {
 public:
  // Core loop. Output accumulates in the internal buffer (view via output()).
  RunStatus run_into(std::span<const Opcode> ops, std::span<const std::int32_t> match,
                     std::string_view input, std::uint64_t step_budget, std::uint64_t output_limit,
                     std::uint64_t* steps_out, FaultKind* fault_out) {
    stack_.clear();
    output_.clear();
    std::uint64_t steps = 0;
    if (output_limit == 0) {
      *steps_out = 0;
      return RunStatus::OutputLimitReached;
    }
    std::size_t ip = 0;
    std::size_t in_pos = 0;
    RunStatus status;
    FaultKind fault = FaultKind::EmptyStackPop;
    for (;;) {
      if (steps == step_budget) {
        status = RunStatus::BudgetExhausted;
        break;
      }
      ++steps;
      switch (ops[ip]) {
        case Opcode::Zero:
          stack_.push_back(0);
          ++ip;
          break;
        case Opcode::Inc:
          if (stack_.empty()) { fault = FaultKind::EmptyStackPop; goto faulted; }
          ++stack_.back();
          ++ip;
          break;
        case Opcode::Read:
          if (in_pos >= input.size()) { fault = FaultKind::InputExhausted; goto faulted; }
          stack_.push_back(static_cast<std::uint64_t>(input[in_pos++] - '0'));
          ++ip;
          break;
        case Opcode::Dup:
          if (stack_.empty()) { fault = FaultKind::EmptyStackPop; goto faulted; }
          stack_.push_back(stack_.back());
          ++ip;
          break;
        case Opcode::Out: {
          if (stack_.empty()) { fault = FaultKind::EmptyStackPop; goto faulted; }
          std::uint64_t v = stack_.back();
          stack_.pop_back();
          output_.push_back(static_cast<char>('0' + (v & 1)));
          ++ip;
          if (output_.size() == output_limit) {
            status = RunStatus::OutputLimitReached;
            goto done;
          }
          break;
        }
        case Opcode::Loop:
          if (stack_.empty()) { fault = FaultKind::EmptyStackPop; goto faulted; }
          ip = stack_.back() == 0 ? static_cast<std::size_t>(match[ip]) + 1 : ip + 1;
          break;
        case Opcode::EndLoop:
          ip = static_cast<std::size_t>(match[ip]);
          break;
        case Opcode::Halt:
          status = RunStatus::Halted;
          goto done;
      }
    }
  done:
    *steps_out = steps;
    return status;
  faulted:
    *steps_out = steps;
    *fault_out = fault;
    return RunStatus::Fault;
  }

  std::string_view output() const { return output_; }

 private:
  std::vector<std::uint64_t> stack_;
  std::string output_;
};

// Deterministic budget-bounded execution; one instruction costs one step.
// Faults are data: the result carries the partial output.
inline RunResult run(const Program& p, std::string_view input, std::uint64_t step_budget,
                     std::uint64_t output_limit) {
  if (step_budget < 1) throw std::invalid_argument("step budget must be at least 1");
  Machine m;
  RunResult r;
  FaultKind fault = FaultKind::EmptyStackPop;
  r.status = m.run_into(p.ops, p.match, input, step_budget, output_limit, &r.steps_used, &fault);
  if (r.status == RunStatus::Fault) r.fault = fault;
  r.output = Bits(m.output());
  return r;
}

}  // namespace uind

#endif
