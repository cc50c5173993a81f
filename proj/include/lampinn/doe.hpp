#ifndef LAMPINN_DOE_HPP
#define LAMPINN_DOE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lampinn {

enum class PdeFamily { Helmholtz2D, Burgers1D };

std::string family_name(PdeFamily f);
PdeFamily family_from_name(const std::string& name);

/// One design variable: its admissible range and the ordered levels used
/// by the factorial design.
struct FactorSpec {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> levels;

    void check_valid() const;
};

/// Task configuration vector identifying one PDE instance.
struct TaskConfig {
    PdeFamily family = PdeFamily::Helmholtz2D;
    std::vector<double> values;
    std::uint64_t id = 0;

    static TaskConfig make(PdeFamily family, std::vector<double> values);
};

std::uint64_t task_hash(PdeFamily family, const std::vector<double>& values);

/// Stable combiner for deriving per-task seeds from a global seed, so
/// results do not depend on execution order.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Cartesian product of factor levels, first factor slowest.
std::vector<TaskConfig> full_factorial(PdeFamily family, const std::vector<FactorSpec>& factors);

/// Extend each factor's upper bound to min + (max-min)*scale/100 and append
/// the new boundary as a level. scale=100 is the identity.
std::vector<FactorSpec> ood_extend(const std::vector<FactorSpec>& factors, double scale_percent);

/// n tasks uniform over the factor box, excluding exact coincidences with
/// `exclude`; deterministic in seed.
std::vector<TaskConfig> sample_unseen(PdeFamily family, const std::vector<FactorSpec>& factors,
                                      int n, std::uint64_t seed,
                                      const std::vector<TaskConfig>& exclude);

/// Structured text export/import: one task per record.
void write_task_set(std::ostream& os, const std::vector<FactorSpec>& factors,
                    const std::vector<TaskConfig>& tasks);
std::vector<TaskConfig> read_task_set(std::istream& is);

}  // namespace lampinn

#endif
