#include "mfs/models.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace mfs {

namespace {

using nlohmann::json;

double table_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v == "inf" || v == "+inf" || v == "Infinity")) return kInf;
  throw ModelError("phi.values: entries must be numbers or \"inf\"");
}

json table_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("field '") + key + "': " + e.what());
  }
}

std::vector<double> tilted_weights(const std::vector<std::vector<double>>& points, double h) {
  std::vector<double> w(points.size());
  double shift = -kInf;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = h * (points[i].empty() ? 0.0 : points[i][0]);
    shift = std::max(shift, w[i]);
  }
  double total = 0.0;
  for (auto& x : w) {
    x = std::exp(x - shift);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

SpacePtr build_space(const SpaceSpec& s) {
  std::vector<std::vector<double>> points;
  if (s.type == "ising") {
    if (s.m != 2) throw ModelError("space: ising has m = 2");
    points = {{1.0}, {-1.0}};
  } else if (s.type == "circle") {
    if (s.m < 1) throw ModelError("space: circle needs m >= 1");
    for (std::size_t k = 0; k < s.m; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(s.m);
      points.push_back({std::cos(t), std::sin(t)});
    }
  } else if (s.type == "interval") {
    if (s.m < 1) throw ModelError("space: interval needs m >= 1");
    for (std::size_t k = 0; k < s.m; ++k) {
      points.push_back({s.m == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(s.m - 1)});
    }
  } else if (s.type == "points") {
    if (s.weights.empty()) throw ModelError("space: points needs weights");
    if (!s.points.empty() && s.points.size() != s.weights.size()) {
      throw ModelError("space: points and weights differ in length");
    }
    std::vector<double> w = s.weights;
    if (s.h != 0.0 && !s.points.empty()) {
      const auto tilt = tilted_weights(s.points, s.h);
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) total += (w[i] *= tilt[i]);
      for (auto& x : w) x /= total;
    }
    return StateSpace::make(s.points, std::move(w));
  } else {
    throw ModelError("space: unknown type '" + s.type + "'");
  }
  auto w = tilted_weights(points, s.h);
  return StateSpace::make(std::move(points), std::move(w));
}

bool hint_matches(Shape hint, const ShapeClass& cert) {
  switch (hint) {
    case Shape::Convex: return cert.convex();
    case Shape::Concave: return cert.concave();
    case Shape::Affine: return cert.shape == Shape::Affine;
    case Shape::Neither: return cert.shape == Shape::Neither;
  }
  return false;
}

}  // namespace

ModelSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("model spec must be a JSON object");
  ModelSpec spec;
  spec.name = field_or<std::string>(j, "name", "");
  spec.n = field_or<std::size_t>(j, "n", 2);
  if (j.contains("space")) {
    const auto& s = j.at("space");
    spec.space.type = field_or<std::string>(s, "type", "ising");
    spec.space.m = field_or<std::size_t>(s, "m", spec.space.type == "ising" ? 2 : 0);
    spec.space.h = field_or<double>(s, "h", 0.0);
    spec.space.points = field_or<std::vector<std::vector<double>>>(s, "points", {});
    spec.space.weights = field_or<std::vector<double>>(s, "weights", {});
    if (spec.space.type == "points" && spec.space.m == 0) spec.space.m = spec.space.weights.size();
  }
  if (j.contains("phi")) {
    const auto& p = j.at("phi");
    spec.phi.type = field_or<std::string>(p, "type", "kernel");
    if (p.contains("values")) {
      if (!p.at("values").is_array()) throw ModelError("phi.values must be an array");
      for (const auto& v : p.at("values")) spec.phi.values.push_back(table_value(v));
    }
    spec.phi.id = field_or<std::string>(p, "id", "neg-sq");
    spec.phi.scale = field_or<double>(p, "scale", 1.0);
    spec.phi.diag_shift = field_or<double>(p, "diag_shift", 0.0);
  }
  if (j.contains("shape_hint") && !j.at("shape_hint").is_null()) {
    try {
      spec.shape_hint = shape_from_string(j.at("shape_hint").get<std::string>());
    } catch (const std::exception& e) {
      throw ModelError(std::string("shape_hint: ") + e.what());
    }
  }
  return spec;
}

json spec_to_json(const ModelSpec& spec) {
  json space = {{"type", spec.space.type}, {"m", spec.space.m}, {"h", spec.space.h}};
  if (spec.space.type == "points") {
    space["points"] = spec.space.points;
    space["weights"] = spec.space.weights;
  }
  json phi = {{"type", spec.phi.type}};
  if (spec.phi.type == "table") {
    json values = json::array();
    for (double v : spec.phi.values) values.push_back(table_json(v));
    phi["values"] = std::move(values);
  } else {
    phi["id"] = spec.phi.id;
    phi["scale"] = spec.phi.scale;
    phi["diag_shift"] = spec.phi.diag_shift;
  }
  json out = {{"name", spec.name}, {"n", spec.n}, {"space", std::move(space)}, {"phi", std::move(phi)}};
  out["shape_hint"] = spec.shape_hint ? json(to_string(*spec.shape_hint)) : json(nullptr);
  return out;
}

Model build(const ModelSpec& spec) {
  SpacePtr space;
  try {
    space = build_space(spec.space);
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelError(std::string("space: ") + e.what());
  }
  const std::size_t m = space->size();

  std::vector<double> table;
  if (spec.phi.type == "table") {
    table = spec.phi.values;
  } else if (spec.phi.type == "kernel") {
    if (spec.n != 2) throw ModelError("phi: kernels are two-body (n = 2)");
    if (!space->has_coordinates()) throw ModelError("phi: kernels need site coordinates");
    double sign;
    if (spec.phi.id == "neg-sq") sign = -1.0;
    else if (spec.phi.id == "pos-sq") sign = 1.0;
    else throw ModelError("phi: unknown kernel id '" + spec.phi.id + "'");
    table.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < space->dim(); ++k) {
          const double d = space->points()[i][k] - space->points()[j][k];
          d2 += d * d;
        }
        table[i * m + j] = sign * spec.phi.scale * d2 + (i == j ? spec.phi.diag_shift : 0.0);
      }
    }
  } else {
    throw ModelError("phi: unknown type '" + spec.phi.type + "'");
  }

  std::optional<Interaction> phi;
  try {
    phi.emplace(space, spec.n, std::move(table));
  } catch (const std::exception& e) {
    throw ModelError(std::string("phi: ") + e.what());
  }

  ShapeClass shape{Shape::Neither, {}};
  if (phi->finite()) {
    shape = classify_shape(*phi);
  } else if (spec.shape_hint) {
    throw ModelError("shape_hint cannot be certified for a table with +inf entries");
  }
  if (spec.phi.type == "kernel" && spec.phi.scale >= 0.0) {
    if (spec.phi.id == "neg-sq" && spec.phi.diag_shift >= 0.0 && !shape.convex()) {
      throw ModelError("neg-sq kernel failed its convexity certificate");
    }
    if (spec.phi.id == "pos-sq" && spec.phi.diag_shift <= 0.0 && !shape.concave()) {
      throw ModelError("pos-sq kernel failed its concavity certificate");
    }
  }
  if (spec.shape_hint && !hint_matches(*spec.shape_hint, shape)) {
    throw ModelError("shape_hint '" + to_string(*spec.shape_hint) + "' contradicts certificate '" +
                     to_string(shape.shape) + "'");
  }
  return Model{spec.name, space, std::move(*phi), shape};
}

ModelSpec builtin_spec(const std::string& id) {
  ModelSpec s;
  s.name = id;
  if (id == "ising-af") {
    s.phi.id = "neg-sq";
    s.shape_hint = Shape::Convex;
  } else if (id == "ising-f") {
    s.phi.id = "pos-sq";
    s.shape_hint = Shape::Concave;
  } else if (id == "hardcore") {
    s.phi.id = "neg-sq";
    s.phi.diag_shift = 100.0;
    s.shape_hint = Shape::Convex;
  } else if (id == "free") {
    s.phi.type = "table";
    s.phi.values = {0.0, 0.0, 0.0, 0.0};
    s.shape_hint = Shape::Affine;
  } else if (id == "circle-af" || id == "circle-f") {
    s.space.type = "circle";
    s.space.m = 8;
    s.phi.id = id == "circle-af" ? "neg-sq" : "pos-sq";
    s.shape_hint = id == "circle-af" ? Shape::Convex : Shape::Concave;
  } else {
    throw ModelError("unknown builtin model '" + id + "'");
  }
  return s;
}

ModelSpec load_spec(const std::string& source) {
  constexpr std::string_view builtin = "builtin:";
  constexpr std::string_view file = "file:";
  if (source.starts_with(builtin)) return builtin_spec(source.substr(builtin.size()));
  const std::string path = source.starts_with(file) ? source.substr(file.size()) : source;
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ModelError("model file '" + path + "': " + e.what());
  }
  auto spec = spec_from_json(j);
  if (spec.name.empty()) spec.name = path;
  return spec;
}

namespace {

std::vector<double> squared_distances(std::span<const double> y, const StateSpace& space) {
  if (!space.has_coordinates()) throw std::invalid_argument("quadratic kernel: sites need coordinates");
  if (y.size() != space.dim()) throw std::invalid_argument("quadratic kernel: point dimension mismatch");
  bool inside = true;
  std::vector<double> d2(space.size(), 0.0);
  for (std::size_t k = 0; k < space.dim(); ++k) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double c = space.points()[i][k];
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      d2[i] += (c - y[k]) * (c - y[k]);
    }
    inside = inside && y[k] >= lo - 1e-12 && y[k] <= hi + 1e-12;
  }
  if (!inside) std::clog << "warning: quadratic cost evaluated outside the grid's bounding box\n";
  return d2;
}

double exponent_factor(KernelSign sign, double scale) {
  return (sign == KernelSign::Negative ? 2.0 : -2.0) * scale;
}

}  // namespace

double quad_cost(std::span<const double> y, const StateSpace& space, KernelSign sign, double scale) {
  auto d2 = squared_distances(y, space);
  const double c = exponent_factor(sign, scale);
  for (auto& v : d2) v *= c;
  return log_mean_exp(d2, space.alpha());
}

std::vector<double> quad_criticality(std::span<const double> y, const StateSpace& space, KernelSign sign,
                                     double scale) {
  const auto d2 = squared_distances(y, space);
  const double c = exponent_factor(sign, scale);
  double shift = -kInf;
  for (double v : d2) shift = std::max(shift, c * v);
  std::vector<double> center(space.dim(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double w = space.alpha(i) * std::exp(c * d2[i] - shift);
    z += w;
    for (std::size_t k = 0; k < space.dim(); ++k) center[k] += w * space.points()[i][k];
  }
  std::vector<double> out(space.dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = y[k] - center[k] / z;
  return out;
}

std::vector<double> barycenter(const DiscreteMeasure& nu) {
  const auto& space = *nu.space();
  if (!space.has_coordinates()) throw std::invalid_argument("barycenter: sites need coordinates");
  std::vector<double> out(space.dim(), 0.0);
  for (std::size_t i = 0; i < nu.size(); ++i) {
    for (std::size_t k = 0; k < space.dim(); ++k) out[k] += nu[i] * space.points()[i][k];
  }
  return out;
}

}  // namespace mfs
