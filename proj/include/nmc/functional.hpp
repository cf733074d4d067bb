#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "nmc/common.hpp"
#include "nmc/path.hpp"

namespace nmc {

// Closed expression grammar for simple path functionals
// Phi = phi(X0; T_1,...,T_m): constants, X0 (and its parity), jump-time
// coordinates, +, *, exp and integer powers. Partials in the jump times are
// derived symbolically, so derivative evaluation is exact.
//
// Evaluation on a path with fewer than m jumps sets T_i = 1 for i > n.
class SimpleFunctional {
public:
    double evaluate(int x0, const std::vector<double>& times) const
    {
        return node_->eval(x0, times);
    }

    double evaluate(const Path& path) const
    {
        return evaluate(path.x0(), padded_times(path));
    }

    // d phi / d t_j, 1-based j.
    double partial(int j, int x0, const std::vector<double>& times) const
    {
        if (j < 1 || j > arity_) throw DomainError("SimpleFunctional::partial: bad index");
        return node_->partial(j)->eval(x0, times);
    }

    // Number of jump-time coordinates the expression reads.
    int arity() const { return arity_; }

    const std::string& name() const { return name_; }

    // Jump times of `path` padded with the t_i = 1 convention up to arity.
    std::vector<double> padded_times(const Path& path) const
    {
        std::vector<double> times = path.jump_times();
        while (static_cast<int>(times.size()) < arity_) times.push_back(1.0);
        return times;
    }

    // --- constructors -----------------------------------------------------

    static SimpleFunctional constant(double c)
    {
        return SimpleFunctional(std::make_shared<ConstNode>(c), format_num(c));
    }

    static SimpleFunctional initial_state()
    {
        return SimpleFunctional(std::make_shared<X0Node>(false), "X0");
    }

    static SimpleFunctional initial_state_parity()
    {
        return SimpleFunctional(std::make_shared<X0Node>(true), "X0 mod 2");
    }

    static SimpleFunctional jump_time(int j)
    {
        if (j < 1) throw DomainError("SimpleFunctional::jump_time: j must be >= 1");
        return SimpleFunctional(std::make_shared<TimeNode>(j),
                                "T" + std::to_string(j));
    }

    SimpleFunctional operator+(const SimpleFunctional& rhs) const
    {
        return SimpleFunctional(std::make_shared<AddNode>(node_, rhs.node_),
                                "(" + name_ + " + " + rhs.name_ + ")");
    }

    SimpleFunctional operator*(const SimpleFunctional& rhs) const
    {
        return SimpleFunctional(std::make_shared<MulNode>(node_, rhs.node_),
                                name_ + "*" + rhs.name_);
    }

    SimpleFunctional exp() const
    {
        return SimpleFunctional(std::make_shared<ExpNode>(node_),
                                "exp(" + name_ + ")");
    }

    SimpleFunctional pow(int k) const
    {
        if (k < 0) throw DomainError("SimpleFunctional::pow: negative exponent");
        return SimpleFunctional(std::make_shared<PowNode>(node_, k),
                                "(" + name_ + ")^" + std::to_string(k));
    }

    SimpleFunctional scaled(double c) const
    {
        return constant(c) * (*this);
    }

private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        virtual ~Node() = default;
        virtual double eval(int x0, const std::vector<double>& t) const = 0;
        virtual NodePtr partial(int j) const = 0;
        virtual int arity() const = 0;
    };

    struct ConstNode final : Node {
        double c;
        explicit ConstNode(double v) : c(v) {}
        double eval(int, const std::vector<double>&) const override { return c; }
        NodePtr partial(int) const override { return std::make_shared<ConstNode>(0.0); }
        int arity() const override { return 0; }
    };

    struct X0Node final : Node {
        bool parity;
        explicit X0Node(bool p) : parity(p) {}
        double eval(int x0, const std::vector<double>&) const override
        {
            if (!parity) return static_cast<double>(x0);
            return static_cast<double>(((x0 % 2) + 2) % 2);
        }
        NodePtr partial(int) const override { return std::make_shared<ConstNode>(0.0); }
        int arity() const override { return 0; }
    };

    struct TimeNode final : Node {
        int j;
        explicit TimeNode(int idx) : j(idx) {}
        double eval(int, const std::vector<double>& t) const override
        {
            return j <= static_cast<int>(t.size()) ? t[j - 1] : 1.0;
        }
        NodePtr partial(int k) const override
        {
            return std::make_shared<ConstNode>(k == j ? 1.0 : 0.0);
        }
        int arity() const override { return j; }
    };

    struct AddNode final : Node {
        NodePtr a, b;
        AddNode(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
        double eval(int x0, const std::vector<double>& t) const override
        {
            return a->eval(x0, t) + b->eval(x0, t);
        }
        NodePtr partial(int j) const override
        {
            return std::make_shared<AddNode>(a->partial(j), b->partial(j));
        }
        int arity() const override { return std::max(a->arity(), b->arity()); }
    };

    struct MulNode final : Node {
        NodePtr a, b;
        MulNode(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
        double eval(int x0, const std::vector<double>& t) const override
        {
            return a->eval(x0, t) * b->eval(x0, t);
        }
        NodePtr partial(int j) const override
        {
            return std::make_shared<AddNode>(
                std::make_shared<MulNode>(a->partial(j), b),
                std::make_shared<MulNode>(a, b->partial(j)));
        }
        int arity() const override { return std::max(a->arity(), b->arity()); }
    };

    struct ExpNode final : Node {
        NodePtr a;
        explicit ExpNode(NodePtr x) : a(std::move(x)) {}
        double eval(int x0, const std::vector<double>& t) const override
        {
            return std::exp(a->eval(x0, t));
        }
        NodePtr partial(int j) const override
        {
            return std::make_shared<MulNode>(a->partial(j),
                                             std::make_shared<ExpNode>(a));
        }
        int arity() const override { return a->arity(); }
    };

    struct PowNode final : Node {
        NodePtr a;
        int k;
        PowNode(NodePtr x, int e) : a(std::move(x)), k(e) {}
        double eval(int x0, const std::vector<double>& t) const override
        {
            double base = a->eval(x0, t);
            double r = 1.0;
            for (int i = 0; i < k; ++i) r *= base;
            return r;
        }
        NodePtr partial(int j) const override
        {
            if (k == 0) return std::make_shared<ConstNode>(0.0);
            return std::make_shared<MulNode>(
                std::make_shared<MulNode>(std::make_shared<ConstNode>(double(k)),
                                          std::make_shared<PowNode>(a, k - 1)),
                a->partial(j));
        }
        int arity() const override { return a->arity(); }
    };

    SimpleFunctional(NodePtr node, std::string name)
        : node_(std::move(node)), name_(std::move(name)), arity_(node_->arity()) {}

    static std::string format_num(double c)
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", c);
        return buf;
    }

    NodePtr node_;
    std::string name_;
    int arity_;
};

} // namespace nmc
