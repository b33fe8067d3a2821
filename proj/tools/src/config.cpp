#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::cli {
namespace {

const json kEmptyObject = json::object();

const char* kind_name(noise::Distribution d) {
  switch (d) {
    case noise::Distribution::kNone: return "none";
    case noise::Distribution::kGaussian: return "gaussian";
    case noise::Distribution::kLorentzian: return "lorentzian";
  }
  return "none";
}

noise::Distribution parse_kind(const std::string& name, const std::string& where) {
  if (name == "none") return noise::Distribution::kNone;
  if (name == "gaussian") return noise::Distribution::kGaussian;
  if (name == "lorentzian") return noise::Distribution::kLorentzian;
  throw ConfigError(where + ": unknown distribution '" + name + "' (none|gaussian|lorentzian)");
}

noise::Spread read_spread(const Node& parent, std::string_view key, const char* width_key,
                          noise::Spread fallback) {
  if (!parent.has(key)) return fallback;
  const Node n = parent.child(key);
  n.allow({"kind", width_key});
  noise::Spread s;
  s.kind = parse_kind(n.text("kind", kind_name(fallback.kind)), n.path("kind"));
  s.width = n.number(width_key, s.kind == noise::Distribution::kNone ? 0.0 : fallback.width);
  return s;
}

json spread_json(const noise::Spread& s, const char* width_key) {
  return json{{"kind", kind_name(s.kind)}, {width_key, s.width}};
}

}  // namespace

Node::Node(const json* value, std::string path) : value_(value), path_(std::move(path)) {
  if (value_ == nullptr) value_ = &kEmptyObject;
  if (!value_->is_object()) throw ConfigError(path_ + ": expected an object");
}

std::string Node::path(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

const json* Node::raw(std::string_view key) const {
  const auto it = value_->find(std::string(key));
  return it == value_->end() ? nullptr : &*it;
}

bool Node::has(std::string_view key) const { return raw(key) != nullptr; }

Node Node::child(std::string_view key) const { return Node(raw(key), path(key)); }

void Node::allow(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, _] : value_->items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(path(key) + ": unknown key");
    }
  }
}

double Node::number(std::string_view key, double fallback) const {
  const json* v = raw(key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
  return v->get<double>();
}

std::uint64_t Node::count(std::string_view key, std::uint64_t fallback) const {
  const json* v = raw(key);
  if (v == nullptr) return fallback;
  if (!v->is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
  return v->get<std::uint64_t>();
}

bool Node::flag(std::string_view key, bool fallback) const {
  const json* v = raw(key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
  return v->get<bool>();
}

std::string Node::text(std::string_view key, std::string fallback) const {
  const json* v = raw(key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
  return v->get<std::string>();
}

std::vector<double> Node::numbers(std::string_view key, std::vector<double> fallback) const {
  const json* v = raw(key);
  if (v == nullptr) return fallback;
  if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& e : *v) {
    if (!e.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json root;
  try {
    root = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON (byte " + std::to_string(e.byte) + ")");
  }
  if (!root.is_object()) throw ConfigError(path + ": top level must be an object");
  Node(&root, "").allow({"params", "field", "noise", "draws", "seed", "output_dir", "ramsey", "dq",
                         "misalign", "polarize", "tempshift", "gyro", "enhancement"});
  return root;
}

spin::NVParams read_params(const Node& root) {
  const Node n = root.child("params");
  n.allow({"zero_field_splitting_hz", "gamma_e_hz_per_g", "gamma_n_hz_per_g", "a_zz_hz", "a_perp_hz",
           "t2e_star_s", "t1e_s", "dazz_dt_hz_per_k"});
  spin::NVParams p;
  p.zero_field_splitting_hz = n.number("zero_field_splitting_hz", p.zero_field_splitting_hz);
  p.gamma_e_hz_per_g = n.number("gamma_e_hz_per_g", p.gamma_e_hz_per_g);
  p.gamma_n_hz_per_g = n.number("gamma_n_hz_per_g", p.gamma_n_hz_per_g);
  p.a_zz_hz = n.number("a_zz_hz", p.a_zz_hz);
  p.a_perp_hz = n.number("a_perp_hz", p.a_perp_hz);
  p.t2e_star_s = n.number("t2e_star_s", p.t2e_star_s);
  p.t1e_s = n.number("t1e_s", p.t1e_s);
  p.dazz_dt_hz_per_k = n.number("dazz_dt_hz_per_k", p.dazz_dt_hz_per_k);
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return p;
}

spin::FieldVector read_field(const Node& root) {
  const Node n = root.child("field");
  n.allow({"magnitude_g", "theta_deg", "phi_deg"});
  spin::FieldVector f;
  f.magnitude_g = n.number("magnitude_g", f.magnitude_g);
  f.theta_rad = deg_to_rad(n.number("theta_deg", 0.0));
  f.phi_rad = deg_to_rad(n.number("phi_deg", 0.0));
  try {
    f.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
  return f;
}

noise::NoiseModel read_noise(const Node& root, const spin::NVParams& params, NoisePreset fallback) {
  const Node n = root.child("noise");
  n.allow({"preset", "calibrated_t2_s", "b_z", "b_x", "b_y", "temperature", "dazz_dt_hz_per_k",
           "coupling", "t1e_envelope", "drift"});

  std::string preset_name = "none";
  if (fallback == NoisePreset::kMagnetic) preset_name = "magnetic";
  if (fallback == NoisePreset::kCalibratedUnprotected) preset_name = "calibrated_unprotected";
  preset_name = n.text("preset", preset_name);

  noise::NoiseModel m;
  if (preset_name == "none") {
    m = protocols::GyroConfig::no_noise();
  } else if (preset_name == "magnetic") {
    m = noise::NoiseModel::magnetic_from(params);
  } else if (preset_name == "calibrated_unprotected") {
    const double t2 = n.number("calibrated_t2_s", 200e-6);
    if (!(t2 > 0.0)) throw ConfigError(n.path("calibrated_t2_s") + ": must be > 0");
    m = protocols::calibrated_unprotected_scenario(params, t2);
  } else {
    throw ConfigError(n.path("preset") + ": unknown preset '" + preset_name +
                      "' (none|magnetic|calibrated_unprotected)");
  }
  if (preset_name != "calibrated_unprotected" && n.has("calibrated_t2_s")) {
    throw ConfigError(n.path("calibrated_t2_s") + ": only valid with preset calibrated_unprotected");
  }
  m.dazz_dt_hz_per_k = params.dazz_dt_hz_per_k;

  m.b_z = read_spread(n, "b_z", "width_g", m.b_z);
  m.b_x = read_spread(n, "b_x", "width_g", m.b_x);
  m.b_y = read_spread(n, "b_y", "width_g", m.b_y);
  m.temperature = read_spread(n, "temperature", "width_k", m.temperature);
  m.dazz_dt_hz_per_k = n.number("dazz_dt_hz_per_k", m.dazz_dt_hz_per_k);
  const std::string coupling = n.text("coupling", "isotropic");
  if (coupling == "isotropic") {
    m.coupling = noise::MagneticCoupling::kIsotropic;
  } else if (coupling == "independent") {
    m.coupling = noise::MagneticCoupling::kIndependent;
  } else {
    throw ConfigError(n.path("coupling") + ": expected isotropic or independent");
  }
  m.t1e_envelope = n.flag("t1e_envelope", m.t1e_envelope);
  const Node d = n.child("drift");
  d.allow({"offset_amplitude", "temperature_amplitude_k", "timescale_s"});
  m.drift.offset_amplitude = d.number("offset_amplitude", m.drift.offset_amplitude);
  m.drift.temperature_amplitude_k = d.number("temperature_amplitude_k", m.drift.temperature_amplitude_k);
  m.drift.timescale_s = d.number("timescale_s", m.drift.timescale_s);
  try {
    m.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  return m;
}

json to_json(const spin::NVParams& p) {
  return json{{"zero_field_splitting_hz", p.zero_field_splitting_hz},
              {"gamma_e_hz_per_g", p.gamma_e_hz_per_g},
              {"gamma_n_hz_per_g", p.gamma_n_hz_per_g},
              {"a_zz_hz", p.a_zz_hz},
              {"a_perp_hz", p.a_perp_hz},
              {"t2e_star_s", p.t2e_star_s},
              {"t1e_s", p.t1e_s},
              {"dazz_dt_hz_per_k", p.dazz_dt_hz_per_k}};
}

json to_json(const spin::FieldVector& f) {
  return json{{"magnitude_g", f.magnitude_g},
              {"theta_deg", rad_to_deg(f.theta_rad)},
              {"phi_deg", rad_to_deg(f.phi_rad)}};
}

json to_json(const noise::NoiseModel& m) {
  return json{
      {"b_z", spread_json(m.b_z, "width_g")},
      {"b_x", spread_json(m.b_x, "width_g")},
      {"b_y", spread_json(m.b_y, "width_g")},
      {"temperature", spread_json(m.temperature, "width_k")},
      {"dazz_dt_hz_per_k", m.dazz_dt_hz_per_k},
      {"coupling", m.coupling == noise::MagneticCoupling::kIsotropic ? "isotropic" : "independent"},
      {"t1e_envelope", m.t1e_envelope},
      {"drift", json{{"offset_amplitude", m.drift.offset_amplitude},
                     {"temperature_amplitude_k", m.drift.temperature_amplitude_k},
                     {"timescale_s", m.drift.timescale_s}}}};
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace nvgyro::cli
