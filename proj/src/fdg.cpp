#include "relplan/fdg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relplan {

MembershipFunction::MembershipFunction(Kind kind, double a, double b)
    : kind_(kind), a_(a), b_(b) {}

MembershipFunction MembershipFunction::identity() {
    return MembershipFunction(Kind::Identity, 0.0, 1.0);
}

MembershipFunction MembershipFunction::thresholded_linear(double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
        throw ValidationError("membership: thresholded_linear requires 0 <= lo < hi <= 1");
    }
    return MembershipFunction(Kind::ThresholdedLinear, lo, hi);
}

MembershipFunction MembershipFunction::concave(double exponent) {
    if (!(exponent > 0.0 && exponent < 1.0)) {
        throw ValidationError("membership: concave exponent must lie in (0, 1)");
    }
    return MembershipFunction(Kind::Concave, exponent, 0.0);
}

MembershipFunction MembershipFunction::s_curve(double lo, double hi) {
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
        throw ValidationError("membership: s_curve requires 0 <= lo < hi <= 1");
    }
    return MembershipFunction(Kind::SCurve, lo, hi);
}

MembershipFunction MembershipFunction::parse(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    try {
        if (parts.size() == 1 && parts[0] == "identity") return identity();
        if (parts.size() == 3 && parts[0] == "tl") {
            return thresholded_linear(std::stod(parts[1]), std::stod(parts[2]));
        }
        if (parts.size() == 2 && parts[0] == "concave") {
            return concave(std::stod(parts[1]));
        }
        if (parts.size() == 3 && parts[0] == "sc") {
            return s_curve(std::stod(parts[1]), std::stod(parts[2]));
        }
    } catch (const std::invalid_argument&) {
        // falls through to the error below
    }
    throw ValidationError("membership: cannot parse '" + spec +
                          "' (expected identity | tl:LO:HI | concave:P | sc:LO:HI)");
}

double MembershipFunction::operator()(double x) const {
    x = std::clamp(x, 0.0, 1.0);
    switch (kind_) {
        case Kind::Identity:
            return x;
        case Kind::ThresholdedLinear:
            if (x < a_) return 0.0;
            if (x >= b_) return 1.0;
            return (x - a_) / (b_ - a_);
        case Kind::Concave:
            return x == 0.0 ? 0.0 : std::pow(x, a_);
        case Kind::SCurve: {
            if (x <= a_) return 0.0;
            if (x >= b_) return 1.0;
            const double t = (x - a_) / (b_ - a_);
            return t * t * (3.0 - 2.0 * t);
        }
    }
    return x;
}

std::string MembershipFunction::spec() const {
    auto fmt = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    switch (kind_) {
        case Kind::Identity:
            return "identity";
        case Kind::ThresholdedLinear:
            return "tl:" + fmt(a_) + ":" + fmt(b_);
        case Kind::Concave:
            return "concave:" + fmt(a_);
        case Kind::SCurve:
            return "sc:" + fmt(a_) + ":" + fmt(b_);
    }
    return "identity";
}

InfluenceMatrix apply_membership(const EellsMatrix& eta, const MembershipFunction& g) {
    const Eigen::Index n = eta.size();
    InfluenceMatrix out;
    out.feature_ids = eta.feature_ids;
    out.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double e = eta.eta(i, j);
            const double sign = e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
            out.entries(i, j) = sign * g(std::abs(e));
        }
        out.entries(i, i) = 1.0;
    }
    out.validate();
    return out;
}

InfluenceMatrix apply_precedence(const InfluenceMatrix& d, const PrecedenceMatrix& gamma) {
    d.validate();
    gamma.validate();
    if (gamma.size() != d.size()) {
        throw ValidationError("precedence: dimension " + std::to_string(gamma.size()) +
                              " does not match influence dimension " + std::to_string(d.size()));
    }
    InfluenceMatrix out = d;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        for (Eigen::Index j = 0; j < d.size(); ++j) {
            if (gamma.entries(i, j) != 0) {
                out.entries(i, j) = static_cast<double>(gamma.entries(i, j));
            }
        }
    }
    return out;
}

InfluenceMatrix transitive_influence(const InfluenceMatrix& d) {
    d.validate();
    const Eigen::Index n = d.size();
    Eigen::MatrixXd pos = d.entries.cwiseMax(0.0);
    Eigen::MatrixXd neg = (-d.entries).cwiseMax(0.0);

    // Relax both parities through every intermediate until nothing moves.
    // A positive pair strength can come from two like-signed legs, a
    // negative one from two opposite-signed legs.
    bool changed = true;
    while (changed) {
        changed = false;
        for (Eigen::Index k = 0; k < n; ++k) {
            for (Eigen::Index i = 0; i < n; ++i) {
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double p = std::max(std::min(pos(i, k), pos(k, j)),
                                              std::min(neg(i, k), neg(k, j)));
                    const double m = std::max(std::min(pos(i, k), neg(k, j)),
                                              std::min(neg(i, k), pos(k, j)));
                    if (p > pos(i, j)) {
                        pos(i, j) = p;
                        changed = true;
                    }
                    if (m > neg(i, j)) {
                        neg(i, j) = m;
                        changed = true;
                    }
                }
            }
        }
    }

    InfluenceMatrix out;
    out.feature_ids = d.feature_ids;
    out.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (pos(i, j) > neg(i, j)) {
                out.entries(i, j) = pos(i, j);
            } else if (neg(i, j) > pos(i, j)) {
                out.entries(i, j) = -neg(i, j);
            } else {
                out.entries(i, j) = 0.0;
            }
        }
        out.entries(i, i) = 1.0;
    }
    out.validate();
    return out;
}

} // namespace relplan
