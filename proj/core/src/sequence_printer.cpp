#include <array>
#include <charconv>
#include <sstream>

#include "nvgyro/sequence.hpp"

namespace nvgyro::seq {
namespace {

std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::kAdd:
    case Expr::Kind::kSub:
      return 1;
    case Expr::Kind::kMul:
    case Expr::Kind::kDiv:
      return 2;
    case Expr::Kind::kNeg:
      return 3;
    default:
      return 4;
  }
}

std::string wrap(const Expr& child, bool parens) {
  return parens ? "(" + child.to_string() + ")" : child.to_string();
}

std::string signed_int(int v) { return v > 0 ? "+" + std::to_string(v) : std::to_string(v); }

std::string pulse_body(const PulseSpec& spec) {
  std::string out;
  if (spec.band == Band::kMicrowave) {
    out = "mw sq(" + signed_int(spec.sq_ms) + ") " + spec.angle.to_string();
    if (spec.select) out += *spec.select > 0 ? " mi(+1/2)" : " mi(-1/2)";
  } else {
    out = "rf";
    if (spec.select) out += " ms(" + signed_int(*spec.select) + ")";
    out += " " + spec.angle.to_string();
  }
  if (!(spec.phase == Expr())) out += " phase=" + spec.phase.to_string();
  return out;
}

struct Printer {
  std::ostream& os;

  void operator()(const IdealPulse& p) const { os << "pulse " << pulse_body(p.spec); }
  void operator()(const DQPulse&) const { os << "dq"; }
  void operator()(const FinitePulse& p) const {
    const FinitePulse defaults;
    os << "fpulse " << pulse_body(p.spec);
    os << " rabi=" << p.rabi_hz.to_string();
    if (!(p.detuning_hz == defaults.detuning_hz)) os << " detuning=" << p.detuning_hz.to_string();
    if (!(p.cutoff_hz == defaults.cutoff_hz)) os << " cutoff=" << p.cutoff_hz.to_string();
  }
  void operator()(const FreeEvolve& e) const { os << "evolve " << e.duration_s.to_string(); }
  void operator()(const LaserReset& r) const {
    os << "reset";
    if (r.ms != 0) os << " ms=" << signed_int(r.ms);
    if (!(r.fidelity == Expr::number(1.0))) os << " fidelity=" << r.fidelity.to_string();
  }
  void operator()(const Readout& r) const {
    os << "readout";
    if (r.ms != 0) os << " ms=" << signed_int(r.ms);
  }
};

}  // namespace

std::string Expr::to_string() const {
  switch (kind_) {
    case Kind::kNumber: {
      if (!text_.empty()) return text_;
      const char* unit = dim_ == Dim::kTime ? "s" : dim_ == Dim::kFrequency ? "Hz" : "";
      return shortest(value_) + unit;
    }
    case Kind::kPi:
      return "pi";
    case Kind::kParam:
      return "$" + text_;
    case Kind::kNeg:
      return "-" + wrap(args_[0], precedence(args_[0]) < 3);
    default: {
      const int p = precedence(*this);
      const char* op = kind_ == Kind::kAdd   ? " + "
                       : kind_ == Kind::kSub ? " - "
                       : kind_ == Kind::kMul ? "*"
                                             : "/";
      const bool right_strict = kind_ == Kind::kSub || kind_ == Kind::kDiv;
      const int rp = precedence(args_[1]);
      return wrap(args_[0], precedence(args_[0]) < p) + op +
             wrap(args_[1], rp < p || (right_strict && rp == p));
    }
  }
}

std::string print_sequence(const Sequence& seq) {
  std::ostringstream os;
  for (const ParamDecl& p : seq.params) {
    os << "param " << p.name;
    if (p.default_value) os << " = " << p.default_value->to_string();
    os << '\n';
  }
  for (const Element& e : seq.elements) {
    std::visit(Printer{os}, e.body);
    os << '\n';
  }
  return os.str();
}

}  // namespace nvgyro::seq
