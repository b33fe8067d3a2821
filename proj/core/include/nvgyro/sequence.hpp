#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nvgyro::seq {

// Physical dimension carried by unit suffixes. Parameters and bare numbers
// are kPlain; angles are plain radians ("deg" converts).
enum class Dim { kPlain, kTime, kFrequency };

// Arithmetic over literals, pi and $parameters. Values are stored in SI
// (seconds, Hz, radians); `text` keeps the literal as written so printing is
// lossless. Equality compares values, not spelling.
class Expr {
 public:
  enum class Kind { kNumber, kPi, kParam, kNeg, kAdd, kSub, kMul, kDiv };

  Expr() = default;

  static Expr number(double value, Dim dim = Dim::kPlain, std::string text = {});
  static Expr pi();
  static Expr param(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(Kind op, Expr lhs, Expr rhs);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  Dim dim() const { return dim_; }
  const std::string& text() const { return text_; }
  const std::vector<Expr>& args() const { return args_; }

  bool is_constant() const;
  // Throws BindingError on an unbound parameter.
  double evaluate(const std::map<std::string, double>& bindings) const;
  void collect_params(std::vector<std::string>& out) const;
  std::string to_string() const;

  bool operator==(const Expr& other) const;

 private:
  Kind kind_ = Kind::kNumber;
  double value_ = 0.0;
  Dim dim_ = Dim::kPlain;
  std::string text_;
  std::vector<Expr> args_;
};

enum class Band { kMicrowave, kRadio };

// mw: the 0 <-> sq_ms line, optionally selective on m_I (twice_mi).
// rf: the nuclear +1/2 <-> -1/2 line, optionally selective on m_S.
struct PulseSpec {
  Band band = Band::kMicrowave;
  int sq_ms = -1;
  std::optional<int> select;
  Expr angle = Expr::pi();
  Expr phase;

  bool operator==(const PulseSpec&) const = default;
};

struct IdealPulse {
  PulseSpec spec;
  bool operator==(const IdealPulse&) const = default;
};

// Composite of three non-selective pi pulses: (0<->-1), (0<->+1), (0<->-1).
struct DQPulse {
  bool operator==(const DQPulse&) const = default;
};

struct FinitePulse {
  PulseSpec spec;
  Expr rabi_hz = Expr::number(1e6, Dim::kFrequency);
  Expr detuning_hz = Expr::number(0.0, Dim::kFrequency);
  Expr cutoff_hz = Expr::number(100e6, Dim::kFrequency);
  bool operator==(const FinitePulse&) const = default;
};

struct FreeEvolve {
  Expr duration_s;
  bool operator==(const FreeEvolve&) const = default;
};

// Optical reset: electron to |ms>, nuclear state kept with the given
// fidelity and otherwise depolarized.
struct LaserReset {
  int ms = 0;
  Expr fidelity = Expr::number(1.0);
  bool operator==(const LaserReset&) const = default;
};

struct Readout {
  int ms = 0;
  bool operator==(const Readout&) const = default;
};

using ElementBody = std::variant<IdealPulse, DQPulse, FinitePulse, FreeEvolve, LaserReset, Readout>;

struct Element {
  ElementBody body;
  std::size_t line = 0;  // source line, 0 when built in code

  bool operator==(const Element& other) const { return body == other.body; }
};

struct ParamDecl {
  std::string name;
  std::optional<Expr> default_value;
  bool operator==(const ParamDecl&) const = default;
};

using Bindings = std::map<std::string, double>;

struct Sequence {
  std::vector<ParamDecl> params;
  std::vector<Element> elements;

  bool operator==(const Sequence&) const = default;

  // Declared defaults overlaid with `bindings`. Throws BindingError if a
  // parameter stays unbound or a binding names an undeclared parameter.
  Bindings resolve(const Bindings& bindings) const;
};

// One element per line, '#' comments. Throws ParseError with line/column.
Sequence parse_sequence(std::string_view text);

// Canonical text; parse_sequence(print_sequence(s)) == s.
std::string print_sequence(const Sequence& seq);

// The three pi pulses a DQPulse stands for.
std::vector<IdealPulse> expand_dq();

}  // namespace nvgyro::seq
