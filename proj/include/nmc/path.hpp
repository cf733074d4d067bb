#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "nmc/common.hpp"

namespace nmc {

// Unit-jump counting path on [0,1]: an initial integer state and a strictly
// increasing list of jump instants in (0,1). Immutable after construction.
class Path {
public:
    Path() : x0_(0) {}

    Path(int x0, std::vector<double> jump_times)
        : x0_(x0), jumps_(std::move(jump_times))
    {
        validate();
    }

    int x0() const { return x0_; }
    const std::vector<double>& jump_times() const { return jumps_; }
    int jump_count() const { return static_cast<int>(jumps_.size()); }
    int terminal_state() const { return x0_ + jump_count(); }

    // X_t = x0 + #{i : t_i <= t}, right-continuous.
    int value(double t) const
    {
        if (t < 0.0 || t > 1.0) throw DomainError("Path::value: t outside [0,1]");
        auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t);
        return x0_ + static_cast<int>(it - jumps_.begin());
    }

    // X_{t^-} = x0 + #{i : t_i < t}.
    int left_value(double t) const
    {
        if (t <= 0.0 || t > 1.0) throw DomainError("Path::left_value: t outside (0,1]");
        auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t);
        return x0_ + static_cast<int>(it - jumps_.begin());
    }

    // CSV line "x0,t1,...,tn", times at 17 significant digits.
    std::string to_csv() const
    {
        std::string out = std::to_string(x0_);
        char buf[32];
        for (double t : jumps_) {
            std::snprintf(buf, sizeof(buf), ",%.17g", t);
            out += buf;
        }
        return out;
    }

    static Path from_csv(const std::string& line)
    {
        std::istringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ','))
            throw DomainError("Path::from_csv: empty line");
        int x0 = std::stoi(field);
        std::vector<double> jumps;
        while (std::getline(ss, field, ','))
            jumps.push_back(std::strtod(field.c_str(), nullptr));
        return Path(x0, std::move(jumps));
    }

    bool operator==(const Path& other) const
    {
        return x0_ == other.x0_ && jumps_ == other.jumps_;
    }

private:
    void validate() const
    {
        double prev = 0.0;
        for (double t : jumps_) {
            if (t <= 0.0 || t >= 1.0)
                throw DomainError("Path: jump time outside (0,1)");
            if (t <= prev)
                throw DomainError("Path: jump times not strictly increasing");
            prev = t;
        }
    }

    int x0_;
    std::vector<double> jumps_;
};

} // namespace nmc
