#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "nvgyro/errors.hpp"
#include "nvgyro/sequence.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::seq {

// ---------------------------------------------------------------- Expr

Expr Expr::number(double value, Dim dim, std::string text) {
  if (value < 0.0 && text.empty()) return negate(number(-value, dim));
  Expr e;
  e.kind_ = Kind::kNumber;
  e.value_ = value;
  e.dim_ = dim;
  e.text_ = std::move(text);
  e.args_.clear();
  return e;
}

Expr Expr::pi() {
  Expr e = number(kPi);
  e.kind_ = Kind::kPi;
  e.text_ = "pi";
  return e;
}

Expr Expr::param(std::string name) {
  Expr e = number(0.0);
  e.kind_ = Kind::kParam;
  e.text_ = std::move(name);
  return e;
}

Expr Expr::negate(Expr operand) {
  Expr e = number(0.0);
  e.kind_ = Kind::kNeg;
  e.dim_ = operand.dim_;
  e.args_ = {std::move(operand)};
  return e;
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
  Expr e = number(0.0);
  e.kind_ = op;
  const Dim a = lhs.dim_;
  const Dim b = rhs.dim_;
  switch (op) {
    case Kind::kAdd:
    case Kind::kSub:
      if (a != Dim::kPlain && b != Dim::kPlain && a != b) {
        throw InvalidArgument("mixed time and frequency units");
      }
      e.dim_ = a != Dim::kPlain ? a : b;
      break;
    case Kind::kMul:
      if (a != Dim::kPlain && b != Dim::kPlain) throw InvalidArgument("product of two dimensioned values");
      e.dim_ = a != Dim::kPlain ? a : b;
      break;
    case Kind::kDiv:
      if (b != Dim::kPlain) throw InvalidArgument("division by a dimensioned value");
      e.dim_ = a;
      break;
    default:
      throw InvalidArgument("not a binary operator");
  }
  e.args_ = {std::move(lhs), std::move(rhs)};
  return e;
}

bool Expr::is_constant() const {
  if (kind_ == Kind::kParam) return false;
  return std::all_of(args_.begin(), args_.end(), [](const Expr& a) { return a.is_constant(); });
}

double Expr::evaluate(const std::map<std::string, double>& bindings) const {
  switch (kind_) {
    case Kind::kNumber:
    case Kind::kPi:
      return value_;
    case Kind::kParam: {
      const auto it = bindings.find(text_);
      if (it == bindings.end()) throw BindingError("unbound parameter '$" + text_ + "'");
      return it->second;
    }
    case Kind::kNeg:
      return -args_[0].evaluate(bindings);
    case Kind::kAdd:
      return args_[0].evaluate(bindings) + args_[1].evaluate(bindings);
    case Kind::kSub:
      return args_[0].evaluate(bindings) - args_[1].evaluate(bindings);
    case Kind::kMul:
      return args_[0].evaluate(bindings) * args_[1].evaluate(bindings);
    case Kind::kDiv:
      return args_[0].evaluate(bindings) / args_[1].evaluate(bindings);
  }
  return 0.0;
}

void Expr::collect_params(std::vector<std::string>& out) const {
  if (kind_ == Kind::kParam && std::find(out.begin(), out.end(), text_) == out.end()) {
    out.push_back(text_);
  }
  for (const Expr& a : args_) a.collect_params(out);
}

bool Expr::operator==(const Expr& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::kNumber:
      return value_ == other.value_ && dim_ == other.dim_;
    case Kind::kPi:
      return true;
    case Kind::kParam:
      return text_ == other.text_;
    default:
      return args_ == other.args_;
  }
}

Bindings Sequence::resolve(const Bindings& bindings) const {
  Bindings out;
  for (const ParamDecl& p : params) {
    if (p.default_value) out[p.name] = p.default_value->evaluate({});
  }
  for (const auto& [name, value] : bindings) {
    const bool declared = std::any_of(params.begin(), params.end(),
                                      [&](const ParamDecl& p) { return p.name == name; });
    if (!declared) throw BindingError("binding for undeclared parameter '$" + name + "'");
    out[name] = value;
  }
  for (const ParamDecl& p : params) {
    if (!out.count(p.name)) throw BindingError("unbound parameter '$" + p.name + "'");
  }
  return out;
}

std::vector<IdealPulse> expand_dq() {
  const auto sq = [](int ms) {
    PulseSpec spec;
    spec.band = Band::kMicrowave;
    spec.sq_ms = ms;
    spec.angle = Expr::pi();
    return IdealPulse{spec};
  };
  return {sq(-1), sq(+1), sq(-1)};
}

// ---------------------------------------------------------------- lexer

namespace {

struct Token {
  enum class Type { kIdent, kNumber, kParam, kSymbol, kEnd };
  Type type = Type::kEnd;
  std::string text;
  std::size_t column = 0;
  double value = 0.0;
  Dim dim = Dim::kPlain;
};

struct Unit {
  std::string_view name;
  double scale;
  Dim dim;
};

constexpr Unit kUnits[] = {
    {"ns", 1e-9, Dim::kTime},       {"us", 1e-6, Dim::kTime},
    {"\xC2\xB5s", 1e-6, Dim::kTime}, {"ms", 1e-3, Dim::kTime},
    {"s", 1.0, Dim::kTime},         {"Hz", 1.0, Dim::kFrequency},
    {"kHz", 1e3, Dim::kFrequency},  {"MHz", 1e6, Dim::kFrequency},
    {"GHz", 1e9, Dim::kFrequency},  {"deg", kPi / 180.0, Dim::kPlain},
    {"rad", 1.0, Dim::kPlain},
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }
bool is_unit_char(unsigned char c) { return std::isalpha(c) || c == 0xC2 || c == 0xB5; }

class Lexer {
 public:
  Lexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      if (pos_ >= line_.size()) break;
      tokens.push_back(next());
    }
    Token end;
    end.type = Token::Type::kEnd;
    end.column = column_of(line_.size());
    tokens.push_back(end);
    return tokens;
  }

 private:
  // 1-based column counted in code points.
  std::size_t column_of(std::size_t byte) const {
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < line_.size(); ++i) {
      if ((static_cast<unsigned char>(line_[i]) & 0xC0) != 0x80) ++col;
    }
    return col;
  }

  [[noreturn]] void fail(std::size_t byte, const std::string& msg) const {
    throw ParseError(line_no_, column_of(byte), msg);
  }

  Token next() {
    const std::size_t start = pos_;
    const auto c = static_cast<unsigned char>(line_[pos_]);
    Token tok;
    tok.column = column_of(start);
    if (is_ident_start(c)) {
      while (pos_ < line_.size() && is_ident_char(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      tok.type = Token::Type::kIdent;
      tok.text = std::string(line_.substr(start, pos_ - start));
      return tok;
    }
    if (c == '$') {
      ++pos_;
      if (pos_ >= line_.size() || !is_ident_start(static_cast<unsigned char>(line_[pos_]))) {
        fail(start, "expected parameter name after '$'");
      }
      while (pos_ < line_.size() && is_ident_char(static_cast<unsigned char>(line_[pos_]))) ++pos_;
      tok.type = Token::Type::kParam;
      tok.text = std::string(line_.substr(start + 1, pos_ - start - 1));
      return tok;
    }
    if (std::isdigit(c) || (c == '.' && pos_ + 1 < line_.size() &&
                            std::isdigit(static_cast<unsigned char>(line_[pos_ + 1])))) {
      return number(start);
    }
    if (std::string_view("()+-*/=,").find(static_cast<char>(c)) != std::string_view::npos) {
      ++pos_;
      tok.type = Token::Type::kSymbol;
      tok.text = std::string(1, static_cast<char>(c));
      return tok;
    }
    fail(start, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  Token number(std::size_t start) {
    const auto digit = [&](std::size_t i) {
      return i < line_.size() && std::isdigit(static_cast<unsigned char>(line_[i]));
    };
    while (digit(pos_)) ++pos_;
    if (pos_ < line_.size() && line_[pos_] == '.') {
      ++pos_;
      while (digit(pos_)) ++pos_;
    }
    if (pos_ < line_.size() && (line_[pos_] == 'e' || line_[pos_] == 'E')) {
      std::size_t k = pos_ + 1;
      if (k < line_.size() && (line_[k] == '+' || line_[k] == '-')) ++k;
      if (digit(k)) {
        pos_ = k;
        while (digit(pos_)) ++pos_;
      }
    }
    const std::size_t number_end = pos_;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line_.data() + start, line_.data() + number_end, value);
    if (ec != std::errc() || ptr != line_.data() + number_end) fail(start, "malformed number");

    Token tok;
    tok.type = Token::Type::kNumber;
    tok.column = column_of(start);
    while (pos_ < line_.size() && is_unit_char(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    const std::string_view unit = line_.substr(number_end, pos_ - number_end);
    if (!unit.empty()) {
      const auto* u = std::find_if(std::begin(kUnits), std::end(kUnits),
                                   [&](const Unit& x) { return x.name == unit; });
      if (u == std::end(kUnits)) fail(number_end, "unknown unit '" + std::string(unit) + "'");
      value *= u->scale;
      tok.dim = u->dim;
    }
    tok.value = value;
    tok.text = std::string(line_.substr(start, pos_ - start));
    return tok;
  }

  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- parser

enum class Slot { kAngle, kDuration, kFrequency, kPlain, kAny };

class LineParser {
 public:
  LineParser(std::vector<Token> tokens, std::size_t line_no, const std::set<std::string>& declared)
      : tokens_(std::move(tokens)), line_no_(line_no), declared_(declared) {}

  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
  bool at_end() const { return peek().type == Token::Type::kEnd; }

  bool peek_symbol(char c) const {
    return peek().type == Token::Type::kSymbol && peek().text[0] == c;
  }
  bool peek_ident(std::string_view name) const {
    return peek().type == Token::Type::kIdent && peek().text == name;
  }
  // ident '=' lookahead for key=value options.
  bool peek_option() const {
    return peek().type == Token::Type::kIdent && pos_ + 1 < tokens_.size() &&
           tokens_[pos_ + 1].type == Token::Type::kSymbol && tokens_[pos_ + 1].text == "=";
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(line_no_, at.column, msg);
  }

  void expect_symbol(char c) {
    if (!peek_symbol(c)) fail(peek(), std::string("expected '") + c + "'");
    take();
  }

  std::string expect_ident() {
    if (peek().type != Token::Type::kIdent) fail(peek(), "expected a name");
    return take().text;
  }

  void expect_end() {
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "'");
  }

  int signed_integer() {
    int sign = 1;
    if (peek_symbol('+') || peek_symbol('-')) sign = take().text == "-" ? -1 : 1;
    const Token& t = peek();
    if (t.type != Token::Type::kNumber || t.dim != Dim::kPlain || t.value != std::floor(t.value)) {
      fail(t, "expected an integer");
    }
    take();
    return sign * static_cast<int>(t.value);
  }

  Expr expression(Slot slot) {
    const Token& start = peek();
    Expr e;
    try {
      e = additive();
    } catch (const InvalidArgument& ex) {
      fail(start, ex.what());
    }
    check_slot(e, slot, start);
    return e;
  }

 private:
  Expr additive() {
    Expr lhs = multiplicative();
    while (peek_symbol('+') || peek_symbol('-')) {
      const auto op = take().text == "+" ? Expr::Kind::kAdd : Expr::Kind::kSub;
      lhs = Expr::binary(op, std::move(lhs), multiplicative());
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (peek_symbol('*') || peek_symbol('/')) {
      const auto op = take().text == "*" ? Expr::Kind::kMul : Expr::Kind::kDiv;
      lhs = Expr::binary(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Expr unary() {
    if (peek_symbol('-')) {
      take();
      return Expr::negate(unary());
    }
    if (peek_symbol('+')) {
      take();
      return unary();
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::kNumber:
        take();
        return Expr::number(t.value, t.dim, t.text);
      case Token::Type::kParam:
        if (!declared_.count(t.text)) fail(t, "unbound parameter '$" + t.text + "'");
        take();
        return Expr::param(t.text);
      case Token::Type::kIdent:
        if (t.text == "pi") {
          take();
          return Expr::pi();
        }
        break;
      case Token::Type::kSymbol:
        if (t.text == "(") {
          take();
          Expr inner = additive();
          expect_symbol(')');
          return inner;
        }
        break;
      case Token::Type::kEnd:
        break;
    }
    fail(t, t.type == Token::Type::kEnd ? "expected an expression" : "unexpected '" + t.text + "'");
  }

  void check_slot(const Expr& e, Slot slot, const Token& at) const {
    const bool constant = e.is_constant();
    const double v = constant ? e.evaluate({}) : 0.0;
    switch (slot) {
      case Slot::kAngle:
        if (e.dim() != Dim::kPlain) fail(at, "expected an angle");
        break;
      case Slot::kPlain:
        if (e.dim() != Dim::kPlain) fail(at, "expected a dimensionless value");
        break;
      case Slot::kDuration:
        if (e.dim() == Dim::kFrequency || (e.dim() == Dim::kPlain && constant)) {
          fail(at, "expected a duration with a time unit");
        }
        if (constant && v < 0.0) fail(at, "duration must be >= 0");
        break;
      case Slot::kFrequency:
        if (e.dim() == Dim::kTime || (e.dim() == Dim::kPlain && constant)) {
          fail(at, "expected a frequency with a unit");
        }
        break;
      case Slot::kAny:
        break;
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  const std::set<std::string>& declared_;
};

void check_angle(const LineParser& p, const Token& at, const Expr& angle) {
  if (angle.is_constant()) {
    const double v = angle.evaluate({});
    if (!(v > 0.0 && v <= kTwoPi + 1e-12)) p.fail(at, "pulse angle must lie in (0, 2pi]");
  }
}

// "mi(+1/2)" -> twice m_I.
int parse_mi(LineParser& p) {
  p.expect_symbol('(');
  const Token at = p.peek();
  const int num = p.signed_integer();
  p.expect_symbol('/');
  const Token den_tok = p.peek();
  const int den = p.signed_integer();
  if (den != 2 || (num != 1 && num != -1)) p.fail(at, "nuclear projection must be +1/2 or -1/2");
  (void)den_tok;
  p.expect_symbol(')');
  return num;
}

int parse_ms_paren(LineParser& p) {
  p.expect_symbol('(');
  const Token at = p.peek();
  const int ms = p.signed_integer();
  if (ms < -1 || ms > 1) p.fail(at, "electron projection must be -1, 0 or +1");
  p.expect_symbol(')');
  return ms;
}

int parse_ms_value(LineParser& p) {
  const Token at = p.peek();
  const int ms = p.signed_integer();
  if (ms < -1 || ms > 1) p.fail(at, "electron projection must be -1, 0 or +1");
  return ms;
}

struct PulseParse {
  PulseSpec spec;
  std::optional<Expr> rabi, detuning, cutoff;
};

PulseParse parse_pulse(LineParser& p, bool finite) {
  PulseParse out;
  const Token band_tok = p.peek();
  const std::string band = p.expect_ident();
  if (band == "mw") {
    out.spec.band = Band::kMicrowave;
    const Token tr = p.peek();
    if (!p.peek_ident("sq")) p.fail(tr, "unknown transition '" + tr.text + "'");
    p.take();
    p.expect_symbol('(');
    const Token num = p.peek();
    const int ms = p.signed_integer();
    if (ms != 1 && ms != -1) p.fail(tr, "unknown transition 'sq(" + std::to_string(ms) + ")'");
    (void)num;
    p.expect_symbol(')');
    out.spec.sq_ms = ms;
  } else if (band == "rf") {
    out.spec.band = Band::kRadio;
    out.spec.sq_ms = 0;
  } else {
    p.fail(band_tok, "unknown transition band '" + band + "' (expected mw or rf)");
  }

  bool have_angle = false;
  bool have_phase = false;
  while (!p.at_end()) {
    const Token at = p.peek();
    if (p.peek_option()) {
      const std::string key = p.expect_ident();
      p.expect_symbol('=');
      const auto once = [&](bool seen) {
        if (seen) p.fail(at, "duplicate option '" + key + "'");
      };
      if (key == "phase") {
        once(have_phase);
        have_phase = true;
        out.spec.phase = p.expression(Slot::kAngle);
      } else if (finite && key == "rabi") {
        once(out.rabi.has_value());
        out.rabi = p.expression(Slot::kFrequency);
      } else if (finite && key == "detuning") {
        once(out.detuning.has_value());
        out.detuning = p.expression(Slot::kFrequency);
      } else if (finite && key == "cutoff") {
        once(out.cutoff.has_value());
        out.cutoff = p.expression(Slot::kFrequency);
      } else {
        p.fail(at, "unknown option '" + key + "'");
      }
    } else if (p.peek_ident("mi") || p.peek_ident("ms")) {
      const std::string which = p.expect_ident();
      if (out.spec.select) p.fail(at, "duplicate selector");
      if (which == "mi") {
        if (out.spec.band != Band::kMicrowave) p.fail(at, "rf pulses select by ms(...)");
        out.spec.select = parse_mi(p);
      } else {
        if (out.spec.band != Band::kRadio) p.fail(at, "mw pulses select by mi(...)");
        out.spec.select = parse_ms_paren(p);
      }
    } else {
      if (have_angle) p.fail(at, "unexpected '" + at.text + "'");
      out.spec.angle = p.expression(Slot::kAngle);
      check_angle(p, at, out.spec.angle);
      have_angle = true;
    }
  }
  if (!have_angle) p.fail(p.peek(), "missing pulse angle");
  return out;
}

}  // namespace

Sequence parse_sequence(std::string_view text) {
  Sequence seq;
  std::set<std::string> declared;
  std::size_t line_no = 0;
  std::size_t readout_line = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(Lexer(line, line_no).run(), line_no, declared);
    if (!p.at_end()) {
      const Token head = p.peek();
      if (head.type != Token::Type::kIdent) p.fail(head, "expected an element keyword");
      const std::string keyword = p.expect_ident();
      if (readout_line != 0 && keyword != "param") {
        p.fail(head, "element after readout (declared on line " + std::to_string(readout_line) + ")");
      }

      std::optional<ElementBody> body;
      if (keyword == "param") {
        const Token name_tok = p.peek();
        const std::string name = p.expect_ident();
        if (declared.count(name)) p.fail(name_tok, "parameter '" + name + "' declared twice");
        ParamDecl decl{name, std::nullopt};
        if (p.peek_symbol('=')) {
          p.take();
          const Token at = p.peek();
          decl.default_value = p.expression(Slot::kAny);
          if (!decl.default_value->is_constant()) p.fail(at, "parameter default must be constant");
        }
        p.expect_end();
        declared.insert(name);
        seq.params.push_back(std::move(decl));
      } else if (keyword == "pulse") {
        body = IdealPulse{parse_pulse(p, false).spec};
      } else if (keyword == "fpulse") {
        PulseParse pp = parse_pulse(p, true);
        FinitePulse fp{pp.spec};
        if (pp.rabi) fp.rabi_hz = *pp.rabi;
        if (pp.detuning) fp.detuning_hz = *pp.detuning;
        if (pp.cutoff) fp.cutoff_hz = *pp.cutoff;
        body = fp;
      } else if (keyword == "dq") {
        if (p.peek_ident("pi")) p.take();
        p.expect_end();
        body = DQPulse{};
      } else if (keyword == "evolve") {
        body = FreeEvolve{p.expression(Slot::kDuration)};
        p.expect_end();
      } else if (keyword == "reset" || keyword == "prepare") {
        LaserReset reset;
        bool seen_ms = false, seen_fid = false;
        while (!p.at_end()) {
          const Token at = p.peek();
          if (!p.peek_option()) p.fail(at, "expected ms=... or fidelity=...");
          const std::string key = p.expect_ident();
          p.expect_symbol('=');
          if (key == "ms" && !seen_ms) {
            reset.ms = parse_ms_value(p);
            seen_ms = true;
          } else if (key == "fidelity" && !seen_fid) {
            const Token v = p.peek();
            reset.fidelity = p.expression(Slot::kPlain);
            if (reset.fidelity.is_constant()) {
              const double f = reset.fidelity.evaluate({});
              if (!(f >= 0.0 && f <= 1.0)) p.fail(v, "fidelity must lie in [0, 1]");
            }
            seen_fid = true;
          } else {
            p.fail(at, (key == "ms" || key == "fidelity" ? "duplicate option '" : "unknown option '") +
                           key + "'");
          }
        }
        body = reset;
      } else if (keyword == "readout") {
        Readout r;
        if (!p.at_end()) {
          const Token at = p.peek();
          if (!p.peek_ident("ms")) p.fail(at, "expected ms=...");
          p.take();
          p.expect_symbol('=');
          r.ms = parse_ms_value(p);
        }
        p.expect_end();
        readout_line = line_no;
        body = r;
      } else {
        p.fail(head, "unknown element '" + keyword + "'");
      }
      if (body) seq.elements.push_back(Element{std::move(*body), line_no});
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (readout_line == 0) {
    throw ParseError(line_no + 1, 1, "missing readout: a sequence must end with 'readout'");
  }
  return seq;
}

}  // namespace nvgyro::seq
