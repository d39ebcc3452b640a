#pragma once

#include "npptwin/plant/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace npptwin::plant {

enum class Access { read_only, read_write };

struct VariableDescriptor {
  std::string name;
  std::string unit;
  Access access = Access::read_only;
  double min = 0.0;
  double max = 0.0;
};

inline constexpr int kProbeCount = 96;

// All mirrorable variables, sorted by name. Stable across runs.
const std::vector<VariableDescriptor>& registry();

// Index into registry(), or nullopt.
std::optional<std::size_t> find_variable(std::string_view name);

// Value of registry()[index] for the given state. Derived values are clamped
// into their declared range.
double evaluate(std::size_t index, const PlantState& state, const DerivedOutputs& derived);

// Full registry evaluated against one state, in registry order.
std::vector<double> evaluate_all(const PlantState& state, const PlantParams& params);

// Clamp `value` to the variable's range and store it into the inputs. The
// variable must be read-write. Returns the applied value.
double apply_input(std::size_t index, PlantInputs& inputs, double value);

// Clamp every stored field and input into its registry range.
void clamp_to_ranges(PlantState& state);

}  // namespace npptwin::plant
