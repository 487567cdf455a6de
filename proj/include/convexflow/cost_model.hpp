#pragma once

#include "errors.hpp"
#include "rational.hpp"

#include <string>

namespace convexflow {

enum class OracleMode { Additive, Multiplicative };

enum class CostKind { Linear, Quadratic, LogEntropic, NegLogConstant };

// Closed set of separable convex arc costs.
//   Linear(d)          C(a) = d a
//   Quadratic(c, d)    C(a) = c a^2 + d a, c > 0
//   LogEntropic        C(a) = a (log a - 1), restricted at 0
//   NegLogConstant(u)  C(a) = -a log u, u > 0
struct CostDescriptor {
    CostKind kind = CostKind::Linear;
    Rational c = 0;
    Rational d = 0;
    Rational u = 1;

    static CostDescriptor linear(Rational d) { return {CostKind::Linear, 0, std::move(d), 1}; }
    static CostDescriptor quadratic(Rational c, Rational d)
    {
        if (c < 0) throw DomainError("quadratic coefficient must be nonnegative");
        if (c == 0) return linear(std::move(d));
        return {CostKind::Quadratic, std::move(c), std::move(d), 1};
    }
    static CostDescriptor log_entropic() { return {CostKind::LogEntropic, 0, 0, 1}; }
    static CostDescriptor neg_log_constant(Rational u)
    {
        if (u <= 0) throw DomainError("utility constant must be positive");
        return {CostKind::NegLogConstant, 0, 0, std::move(u)};
    }

    bool is_linear() const { return kind == CostKind::Linear || kind == CostKind::NegLogConstant; }
    bool is_restricted() const { return kind == CostKind::LogEntropic; }
    bool supports(OracleMode mode) const
    {
        if (mode == OracleMode::Additive) return kind == CostKind::Linear || kind == CostKind::Quadratic;
        return kind == CostKind::LogEntropic || kind == CostKind::NegLogConstant ||
               (kind == CostKind::Linear && d == 0);
    }

    friend bool operator==(const CostDescriptor&, const CostDescriptor&) = default;
};

inline std::string to_string(CostKind k)
{
    switch (k) {
    case CostKind::Linear: return "linear";
    case CostKind::Quadratic: return "quadratic";
    case CostKind::LogEntropic: return "log_entropic";
    case CostKind::NegLogConstant: return "neg_log_constant";
    }
    return "?";
}

// Oracle output. In multiplicative mode value 0 encodes e^{-inf}.
struct DerivativeValue {
    OracleMode mode;
    Rational value;

    bool is_minus_infinity() const { return mode == OracleMode::Multiplicative && value == 0; }
};

// C'(a).
inline Rational derivative(const CostDescriptor& desc, const Rational& alpha)
{
    switch (desc.kind) {
    case CostKind::Linear: return desc.d;
    case CostKind::Quadratic: return 2 * desc.c * alpha + desc.d;
    default: throw ContractViolation("derivative: " + to_string(desc.kind) + " has no additive oracle");
    }
}

// e^{C'(a)}.
inline Rational e_derivative(const CostDescriptor& desc, const Rational& alpha)
{
    switch (desc.kind) {
    case CostKind::NegLogConstant: return 1 / desc.u;
    case CostKind::LogEntropic: return alpha > 0 ? alpha : Rational(0);
    case CostKind::Linear:
        if (desc.d == 0) return 1;
        [[fallthrough]];
    default: throw ContractViolation("e_derivative: " + to_string(desc.kind) + " has no multiplicative oracle");
    }
}

inline DerivativeValue oracle(OracleMode mode, const CostDescriptor& desc, const Rational& alpha)
{
    if (mode == OracleMode::Additive) return {mode, derivative(desc, alpha)};
    return {mode, e_derivative(desc, alpha)};
}

enum class Curvature { Linear, Nonlinear };
enum class Restriction { Free, Restricted };

struct ArcClass {
    Curvature curvature;
    Restriction restriction;
    friend bool operator==(const ArcClass&, const ArcClass&) = default;
};

inline ArcClass classify(const CostDescriptor& desc)
{
    return {desc.is_linear() ? Curvature::Linear : Curvature::Nonlinear,
            desc.is_restricted() ? Restriction::Restricted : Restriction::Free};
}

// Cost of a -> C(a + shift), if the family is closed under the shift.
inline CostDescriptor shifted(const CostDescriptor& desc, const Rational& shift)
{
    if (shift == 0) return desc;
    switch (desc.kind) {
    case CostKind::Linear:
    case CostKind::NegLogConstant: return desc;
    case CostKind::Quadratic: return CostDescriptor::quadratic(desc.c, desc.d + 2 * desc.c * shift);
    case CostKind::LogEntropic: break;
    }
    throw DomainError("cost " + to_string(desc.kind) + " cannot be shifted by a positive lower bound");
}

}
