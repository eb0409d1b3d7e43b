#pragma once

#include "relplan/mining.hpp"
#include "relplan/model.hpp"

#include <string>

// Builds the signed fuzzy dependency graph: map mined strengths through a
// membership function, overlay stakeholder precedence relations at full
// strength, and optionally close the graph over indirect paths.

namespace relplan {

/// Monotone map from a raw strength in [0, 1] to a fuzzy membership in
/// [0, 1] with g(0) = 0 and g(1) = 1.
class MembershipFunction {
public:
    enum class Kind { Identity, ThresholdedLinear, Concave, SCurve };

    static MembershipFunction identity();
    /// 0 below lo, 1 at or above hi, linear ramp in between. 0 <= lo < hi <= 1.
    static MembershipFunction thresholded_linear(double lo, double hi);
    /// x^exponent with exponent in (0, 1).
    static MembershipFunction concave(double exponent);
    /// Smoothstep between lo and hi. 0 <= lo < hi <= 1.
    static MembershipFunction s_curve(double lo, double hi);

    /// Parses the CLI spelling: "identity", "tl:LO:HI", "concave:P", "sc:LO:HI".
    static MembershipFunction parse(const std::string& spec);

    double operator()(double x) const;

    Kind kind() const { return kind_; }
    /// The CLI spelling of this function.
    std::string spec() const;

private:
    MembershipFunction(Kind kind, double a, double b);
    Kind kind_;
    double a_ = 0.0;
    double b_ = 1.0;
};

/// d(i, j) = sign(eta(i, j)) * g(|eta(i, j)|), diagonal forced to +1.
/// A zero eta keeps its unspecified quality (stays 0).
InfluenceMatrix apply_membership(const EellsMatrix& eta, const MembershipFunction& g);

/// Wherever gamma(i, j) != 0, the dependency becomes full strength with
/// the precedence sign: d(i, j) = gamma(i, j) * 1.0. Other cells pass
/// through unchanged.
InfluenceMatrix apply_precedence(const InfluenceMatrix& d, const PrecedenceMatrix& gamma);

/// Signed max-min closure over dependency paths: a path's strength is the
/// minimum of its edge strengths and its quality the product of edge
/// signs. Per pair the strongest positive and strongest negative path
/// strengths are relaxed through intermediates to a fixpoint; the output
/// keeps whichever dominates (0 on an exact tie).
InfluenceMatrix transitive_influence(const InfluenceMatrix& d);

} // namespace relplan
