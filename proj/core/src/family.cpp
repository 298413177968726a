#include "inhomwalk/family.hpp"

#include <cmath>
#include <numbers>

namespace inhomwalk {

using json_util::Fields;
using json_util::fail;
using nlohmann::json;

std::int64_t GridValue::at(std::size_t n) const {
  return static_cast<std::int64_t>(std::floor(scale * std::pow(static_cast<double>(n), power) + 1e-9));
}

IncrementLaw MemberSpec::law_at(std::size_t i) const {
  const IncrementLaw& base = laws.at((i - 1) % laws.size());
  double t = 0.0;
  if (!tilts.empty()) t = tilts[(i - 1) % tilts.size()];
  if (period > 0.0) t += amplitude * std::sin(2.0 * std::numbers::pi * (static_cast<double>(i) + phase) / period);
  return t == 0.0 ? base : tilt(base, t);
}

StepSchedule MemberSpec::schedule(std::size_t n) const {
  if (laws.empty()) throw Error(ErrorCode::InvalidArgument, "member '" + name + "' has no laws");
  std::vector<IncrementLaw> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) out.push_back(law_at(i));
  return StepSchedule(std::move(out));
}

bool MemberSpec::centered() const {
  for (double t : tilts) {
    if (t != 0.0) return false;
  }
  if (period > 0.0 && amplitude != 0.0) return false;
  for (const auto& l : laws) {
    if (std::abs(mean(l)) > 1e-12) return false;
  }
  return true;
}

std::vector<std::size_t> FamilyGrids::ns(const std::string& id, const std::vector<std::size_t>& fallback) const {
  if (auto it = n_for.find(id); it != n_for.end()) return it->second;
  if (!n.empty()) return n;
  return fallback;
}

namespace {

IncrementLaw law(std::vector<double> atoms, std::vector<double> probs) { return validate_law(atoms, probs, true); }

ClassParams standard_params() {
  ClassParams p;
  p.delta0 = 0.5;
  p.c0 = 2.0;
  p.minorant = {{-1, 0.05}, {0, 0.05}, {1, 0.05}};
  return p;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::vector<std::size_t> sizes(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of positive integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() < 1) {
      fail(path + "[" + std::to_string(i) + "]", "expected a positive integer");
    }
    out.push_back(j[i].get<std::size_t>());
  }
  return out;
}


FamilyGrids grids_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  FamilyGrids g;
  if (const json* v = f.find("n")) g.n = sizes(*v, f.sub("n"));
  if (const json* v = f.find("nFor")) {
    if (!v->is_object()) fail(f.sub("nFor"), "expected an object of verifier id -> n list");
    for (auto it = v->begin(); it != v->end(); ++it) g.n_for[it.key()] = sizes(it.value(), f.sub("nFor") + "." + it.key());
  }
  if (const json* v = f.find("uv")) {
    if (!v->is_array()) fail(f.sub("uv"), "expected an array");
    g.uv.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string where = f.sub("uv") + "[" + std::to_string(i) + "]";
      const json& e = (*v)[i];
      if (e.is_number()) {
        g.uv.push_back({e.get<double>(), 0.0});
      } else {
        Fields ef(e, where);
        GridValue gv{ef.number("scale"), ef.number_or("power", 0.0)};
        ef.finish();
        g.uv.push_back(gv);
      }
    }
  }
  g.lambda0 = f.number_or("lambda0", g.lambda0);
  if (const json* v = f.find("s")) g.s = numbers(*v, f.sub("s"));
  if (const json* v = f.find("t")) g.t = numbers(*v, f.sub("t"));
  if (const json* v = f.find("K")) g.K = numbers(*v, f.sub("K"));
  if (const json* v = f.find("alphas")) g.alphas = numbers(*v, f.sub("alphas"));
  g.bridge_alpha = f.number_or("bridgeAlpha", g.bridge_alpha);
  g.tail_beta = f.number_or("tailBeta", g.tail_beta);
  g.epsilon = f.number_or("epsilon", g.epsilon);
  g.a_prime = f.number_or("aPrime", g.a_prime);
  if (const json* v = f.find("swapBlocks")) g.swap_blocks = sizes(*v, f.sub("swapBlocks"));
  g.swap_alpha = f.number_or("swapAlpha", g.swap_alpha);
  g.mc_samples = static_cast<std::size_t>(f.integer_or("mcSamples", static_cast<long long>(g.mc_samples)));
  g.theta_samples = static_cast<std::size_t>(f.integer_or("thetaSamples", static_cast<long long>(g.theta_samples)));
  g.random_laws = static_cast<std::size_t>(f.integer_or("randomLaws", static_cast<long long>(g.random_laws)));
  f.finish();
  if (g.lambda0 < 1.0) fail(f.sub("lambda0"), "must be >= 1");
  if (!(g.bridge_alpha > 0.5 && g.bridge_alpha < 2.0 / 3.0)) fail(f.sub("bridgeAlpha"), "must lie in (1/2, 2/3)");
  if (!(g.tail_beta > 0.0 && g.tail_beta < 1.0 / 6.0)) fail(f.sub("tailBeta"), "must lie in (0, 1/6)");
  if (!(g.epsilon > 0.0 && g.epsilon < 1.0)) fail(f.sub("epsilon"), "must lie in (0, 1)");
  if (!(g.swap_alpha > 0.0 && g.swap_alpha < 2.0 / 3.0)) fail(f.sub("swapAlpha"), "must lie in (0, 2/3)");
  if (g.mc_samples < 1000) fail(f.sub("mcSamples"), "must be >= 1000");
  return g;
}

}  // namespace

ClassParams class_params_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  ClassParams p;
  p.delta0 = f.number_or("delta0", 0.0);
  p.c0 = f.number_or("c0", 1.0);
  if (const json* m = f.find("minorant")) {
    if (!m->is_object()) fail(f.sub("minorant"), "expected an object of atom -> weight");
    for (auto it = m->begin(); it != m->end(); ++it) {
      const std::string where = f.sub("minorant") + "." + it.key();
      std::size_t used = 0;
      long long atom = 0;
      try {
        atom = std::stoll(it.key(), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != it.key().size() || used == 0) fail(where, "atom keys must be integers");
      if (!it.value().is_number()) fail(where, "expected a number");
      p.minorant[atom] = it.value().get<double>();
    }
  }
  f.finish();
  try {
    p.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return p;
}

nlohmann::json class_params_json(const ClassParams& p) {
  json minorant = json::object();
  for (const auto& [a, w] : p.minorant) minorant[std::to_string(a)] = w;
  return json{{"delta0", p.delta0}, {"c0", p.c0}, {"minorant", minorant}};
}

FamilySpec standard_family() {
  FamilySpec f;
  f.name = "standard";
  f.class_params = standard_params();
  const IncrementLaw lazy = lazy_walk();
  const IncrementLaw skewed = law({-1, 0, 1, 2}, {0.5, 0.2, 0.1, 0.2});
  const IncrementLaw uniform = law({-1, 0, 1}, {1.0, 1.0, 1.0});
  f.members.push_back({"lazy", {lazy}, {}, 0.0, 0.0, 0.0});
  f.members.push_back({"skewed", {skewed}, {}, 0.0, 0.0, 0.0});
  f.members.push_back({"alternating", {lazy, uniform, skewed}, {}, 0.0, 0.0, 0.0});
  f.members.push_back({"tilted_lazy", {lazy}, {}, 0.3, 17.0, 0.0});
  return f;
}

FamilySpec lazy_family() {
  FamilySpec f;
  f.name = "lazy";
  f.class_params = standard_params();
  f.members.push_back({"lazy", {lazy_walk()}, {}, 0.0, 0.0, 0.0});
  return f;
}

IncrementLaw law_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  const auto atoms = numbers(f.at("atoms"), f.sub("atoms"));
  const auto probs = numbers(f.at("probs"), f.sub("probs"));
  const bool lattice = f.boolean_or("lattice", true);
  f.finish();
  try {
    return validate_law(atoms, probs, lattice);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

json law_to_json(const IncrementLaw& law) {
  return json{{"atoms", law.atoms()}, {"probs", law.probs()}, {"lattice", law.lattice()}};
}

MemberSpec member_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  MemberSpec m;
  m.name = f.string_or("name", "member");
  const bool base = f.has("base");
  const bool many = f.has("laws");
  if (base == many) fail(path, "give exactly one of 'base' and 'laws'");
  if (base) {
    m.laws.push_back(law_from_json(f.at("base"), f.sub("base")));
  } else {
    const json& ls = f.at("laws");
    if (!ls.is_array() || ls.empty()) fail(f.sub("laws"), "expected a non-empty array of laws");
    for (std::size_t i = 0; i < ls.size(); ++i) {
      m.laws.push_back(law_from_json(ls[i], f.sub("laws") + "[" + std::to_string(i) + "]"));
    }
  }
  for (const auto& l : m.laws) {
    if (!l.lattice()) fail(path, "member laws must be lattice laws");
  }
  if (const json* t = f.find("tilts")) {
    if (t->is_array()) {
      m.tilts = numbers(*t, f.sub("tilts"));
    } else {
      Fields tf(*t, f.sub("tilts"));
      m.amplitude = tf.number("amplitude");
      m.period = tf.number("period");
      m.phase = tf.number_or("phase", 0.0);
      tf.finish();
      if (!(m.period > 0.0)) fail(f.sub("tilts.period"), "must be positive");
    }
  }
  f.finish();
  return m;
}

FamilySpec family_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  FamilySpec fam;
  fam.name = f.string_or("name", "family");
  fam.class_params = f.has("classParams") ? class_params_from_json(f.at("classParams"), f.sub("classParams"))
                                          : standard_params();
  const json& ms = f.at("members");
  if (!ms.is_array() || ms.empty()) fail(f.sub("members"), "expected a non-empty array");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    fam.members.push_back(member_from_json(ms[i], f.sub("members") + "[" + std::to_string(i) + "]"));
  }
  if (f.has("grids")) fam.grids = grids_from_json(f.at("grids"), f.sub("grids"));
  f.finish();
  return fam;
}

FamilySpec family_from_json(const std::string& text) {
  return family_from_json(json_util::parse(text, "family"), "");
}

json family_json(const FamilySpec& fam) {
  json members = json::array();
  for (const auto& m : fam.members) {
    json mj{{"name", m.name}};
    json ls = json::array();
    for (const auto& l : m.laws) ls.push_back(law_to_json(l));
    mj["laws"] = ls;
    if (m.period > 0.0) {
      mj["tilts"] = json{{"amplitude", m.amplitude}, {"period", m.period}, {"phase", m.phase}};
    } else if (!m.tilts.empty()) {
      mj["tilts"] = m.tilts;
    }
    members.push_back(mj);
  }
  const auto& g = fam.grids;
  json uv = json::array();
  for (const auto& v : g.uv) uv.push_back(json{{"scale", v.scale}, {"power", v.power}});
  json grids{{"uv", uv},
             {"lambda0", g.lambda0},
             {"s", g.s},
             {"t", g.t},
             {"K", g.K},
             {"alphas", g.alphas},
             {"bridgeAlpha", g.bridge_alpha},
             {"tailBeta", g.tail_beta},
             {"epsilon", g.epsilon},
             {"aPrime", g.a_prime},
             {"swapBlocks", g.swap_blocks},
             {"swapAlpha", g.swap_alpha},
             {"mcSamples", g.mc_samples},
             {"thetaSamples", g.theta_samples},
             {"randomLaws", g.random_laws}};
  if (!g.n.empty()) grids["n"] = g.n;
  if (!g.n_for.empty()) grids["nFor"] = g.n_for;
  return json{{"name", fam.name},
              {"classParams", class_params_json(fam.class_params)},
              {"members", members},
              {"grids", grids}};
}

std::string family_to_json(const FamilySpec& family) { return family_json(family).dump(2); }

}  // namespace inhomwalk
