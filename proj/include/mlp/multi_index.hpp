#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlp {

// One step of a recursion-tree address: the Picard level the node belongs to
// and the index of its Monte Carlo copy. copy < 0 addresses the companion
// family (the lower iterate of a level difference, and the terminal-value
// samples at level 0); copy is never 0.
struct PathEntry {
    std::int64_t level = 0;
    std::int64_t copy = 0;

    friend bool operator==(const PathEntry&, const PathEntry&) = default;
    friend auto operator<=>(const PathEntry&, const PathEntry&) = default;
};

// Address of one node of the recursion tree. `root` separates whole
// realizations (run index); `path` grows by one (level, copy) entry per
// recursion step. Keys are cheap to copy and safe to share across workers.
class MultiIndexKey {
public:
    MultiIndexKey() = default;
    explicit MultiIndexKey(std::int64_t root) : root_(root) {}

    std::int64_t root() const { return root_; }
    const std::vector<PathEntry>& path() const { return path_; }

    void push(std::int64_t level, std::int64_t copy) {
        if (copy == 0)
            throw std::invalid_argument("MultiIndexKey: copy index must be nonzero");
        if (level < 0)
            throw std::invalid_argument("MultiIndexKey: level must be nonnegative");
        path_.push_back({level, copy});
    }

    void pop() {
        if (path_.empty())
            throw std::logic_error("MultiIndexKey: pop on empty path");
        path_.pop_back();
    }

    // Diagnostic form, e.g. "3:(0,-2)(1,5)".
    std::string to_string() const {
        std::string s = std::to_string(root_) + ":";
        for (const auto& e : path_)
            s += "(" + std::to_string(e.level) + "," + std::to_string(e.copy) + ")";
        return s;
    }

    friend bool operator==(const MultiIndexKey&, const MultiIndexKey&) = default;

private:
    std::int64_t root_ = 0;
    std::vector<PathEntry> path_;
};

} // namespace mlp
