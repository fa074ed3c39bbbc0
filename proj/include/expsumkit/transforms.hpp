#pragma once

#include "expsumkit/ellipticphi.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace esk {

enum class TransformKind { Phi, Exp, P1, P2, R01 };

std::string to_string(TransformKind k);
TransformKind parse_transform(std::string_view s);
inline constexpr TransformKind kAllTransforms[] = {TransformKind::Phi, TransformKind::Exp, TransformKind::P2,
                                                   TransformKind::P1, TransformKind::R01};

// Increasing map of [-1,1] onto [r,1].
class Transform {
public:
    Transform(TransformKind kind, const Real& r, const PrecisionContext& ctx);

    TransformKind kind() const { return kind_; }
    const Real& r() const { return r_; }
    int bits() const { return bits_; }
    const PhiSeries* phi() const { return phi_.get(); }

    Real eval(const Real& u) const;
    Real deriv(const Real& u) const;
    Real rho_hat() const;

private:
    TransformKind kind_;
    Real r_;
    int bits_;
    Real c0_, c1_; // kind-specific constants
    std::shared_ptr<const PhiSeries> phi_;
};

// One series per (r, bits), shared across threads.
std::shared_ptr<const PhiSeries> cached_phi_series(const Real& r, const PrecisionContext& ctx);

} // namespace esk
