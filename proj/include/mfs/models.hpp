// Model specifications (JSON), built-in models, and the reduced objectives
// of the quadratic-kernel examples.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "mfs/interaction.hpp"
#include "mfs/state_space.hpp"

namespace mfs {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelSign { Negative, Positive };  // -|x-y|^2 (antiferro), +|x-y|^2 (ferro)

struct SpaceSpec {
  std::string type = "ising";  // points | ising | circle | interval
  std::size_t m = 2;
  double h = 0.0;              // a priori tilt alpha ~ exp(h x_1)
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};

struct PhiSpec {
  std::string type = "kernel";  // table | kernel
  std::vector<double> values;   // lexicographic m^n table
  std::string id = "neg-sq";    // neg-sq | pos-sq
  double scale = 1.0;
  double diag_shift = 0.0;
};

struct ModelSpec {
  std::string name;
  std::size_t n = 2;
  SpaceSpec space;
  PhiSpec phi;
  std::optional<Shape> shape_hint;
};

struct Model {
  std::string name;
  SpacePtr space;
  Interaction phi;
  ShapeClass shape;
};

ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ModelSpec& spec);

// Throws ModelError on malformed specs or a shape hint the certificate
// contradicts.
Model build(const ModelSpec& spec);

// Built-in ids: ising-af, ising-f, hardcore (ising-af with +100 on the
// diagonal), free (phi = 0), circle-af, circle-f (m = 8 unit-circle grid).
ModelSpec builtin_spec(const std::string& id);

// "builtin:<id>" or "file:<path>" (a bare path is read as a file).
ModelSpec load_spec(const std::string& source);

// log sum_x alpha_x exp(+-2 scale |x - y|^2): + for the negative kernel
// (minimized), - for the positive kernel (maximized).
double quad_cost(std::span<const double> y, const StateSpace& space, KernelSign sign, double scale = 1.0);

// y minus the exp(+-2 scale |x - y|^2)-weighted barycenter of the sites.
std::vector<double> quad_criticality(std::span<const double> y, const StateSpace& space, KernelSign sign,
                                     double scale = 1.0);

std::vector<double> barycenter(const DiscreteMeasure& nu);

}  // namespace mfs
