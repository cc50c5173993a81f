#include "lampinn/doe.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lampinn {

std::string family_name(PdeFamily f) {
    switch (f) {
        case PdeFamily::Helmholtz2D: return "helmholtz2d";
        case PdeFamily::Burgers1D: return "burgers1d";
    }
    throw std::logic_error("unknown family");
}

PdeFamily family_from_name(const std::string& name) {
    if (name == "helmholtz2d") return PdeFamily::Helmholtz2D;
    if (name == "burgers1d") return PdeFamily::Burgers1D;
    throw std::invalid_argument("unknown PDE family: " + name);
}

void FactorSpec::check_valid() const {
    if (levels.empty()) throw std::invalid_argument("FactorSpec '" + name + "': empty level list");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < min || levels[i] > max)
            throw std::invalid_argument("FactorSpec '" + name + "': level outside [min,max]");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw std::invalid_argument("FactorSpec '" + name + "': levels must be strictly increasing");
    }
}

std::uint64_t task_hash(PdeFamily family, const std::vector<double>& values) {
    // FNV-1a over the family tag and the raw value bit patterns.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    const std::string fam = family_name(family);
    mix(fam.data(), fam.size());
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(&bits, sizeof bits);
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
}

TaskConfig TaskConfig::make(PdeFamily family, std::vector<double> values) {
    TaskConfig t;
    t.family = family;
    t.values = std::move(values);
    t.id = task_hash(t.family, t.values);
    return t;
}

std::vector<TaskConfig> full_factorial(PdeFamily family, const std::vector<FactorSpec>& factors) {
    if (factors.empty()) throw std::invalid_argument("full_factorial: need at least one factor");
    std::size_t count = 1;
    for (const FactorSpec& f : factors) {
        f.check_valid();
        count *= f.levels.size();
    }
    std::vector<TaskConfig> tasks;
    tasks.reserve(count);
    std::vector<std::size_t> idx(factors.size(), 0);
    for (std::size_t t = 0; t < count; ++t) {
        std::vector<double> vals(factors.size());
        for (std::size_t p = 0; p < factors.size(); ++p) vals[p] = factors[p].levels[idx[p]];
        tasks.push_back(TaskConfig::make(family, std::move(vals)));
        // lexicographic order, first factor slowest
        for (std::size_t p = factors.size(); p-- > 0;) {
            if (++idx[p] < factors[p].levels.size()) break;
            idx[p] = 0;
        }
    }
    return tasks;
}

std::vector<FactorSpec> ood_extend(const std::vector<FactorSpec>& factors, double scale_percent) {
    if (scale_percent < 100.0)
        throw std::invalid_argument("ood_extend: scale must be >= 100 percent");
    std::vector<FactorSpec> out = factors;
    for (FactorSpec& f : out) {
        const double new_max = f.min + (f.max - f.min) * scale_percent / 100.0;
        if (new_max > f.max) {
            f.max = new_max;
            f.levels.push_back(new_max);
        }
    }
    return out;
}

std::vector<TaskConfig> sample_unseen(PdeFamily family, const std::vector<FactorSpec>& factors,
                                      int n, std::uint64_t seed,
                                      const std::vector<TaskConfig>& exclude) {
    if (n < 1) throw std::invalid_argument("sample_unseen: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<TaskConfig> out;
    while (static_cast<int>(out.size()) < n) {
        std::vector<double> vals(factors.size());
        for (std::size_t p = 0; p < factors.size(); ++p) {
            std::uniform_real_distribution<double> dist(factors[p].min, factors[p].max);
            vals[p] = dist(rng);
        }
        const bool clash = std::any_of(exclude.begin(), exclude.end(), [&](const TaskConfig& t) {
            return t.family == family && t.values == vals;
        });
        if (!clash) out.push_back(TaskConfig::make(family, std::move(vals)));
    }
    return out;
}

void write_task_set(std::ostream& os, const std::vector<FactorSpec>& factors,
                    const std::vector<TaskConfig>& tasks) {
    os << "# lampinn task set v1\n";
    os << "factors";
    for (const FactorSpec& f : factors) os << ' ' << f.name;
    os << '\n';
    os.precision(17);
    for (const TaskConfig& t : tasks) {
        os << family_name(t.family) << ' ' << t.id;
        for (double v : t.values) os << ' ' << v;
        os << '\n';
    }
}

std::vector<TaskConfig> read_task_set(std::istream& is) {
    std::vector<TaskConfig> tasks;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string first;
        ss >> first;
        if (first == "factors") continue;
        std::uint64_t id;
        ss >> id;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        TaskConfig t = TaskConfig::make(family_from_name(first), std::move(vals));
        if (t.id != id) throw std::runtime_error("task set: id mismatch on load");
        tasks.push_back(std::move(t));
    }
    return tasks;
}

}  // namespace lampinn
