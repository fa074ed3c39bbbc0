#include "expsumkit/transforms.hpp"

#include <map>
#include <mutex>

namespace esk {

namespace {
constexpr int kGuard = 16;
}

std::string to_string(TransformKind k)
{
    switch (k) {
    case TransformKind::Phi: return "phi";
    case TransformKind::Exp: return "exp";
    case TransformKind::P1: return "p1";
    case TransformKind::P2: return "p2";
    case TransformKind::R01: return "r01";
    }
    return "?";
}

TransformKind parse_transform(std::string_view s)
{
    if (s == "phi") return TransformKind::Phi;
    if (s == "exp") return TransformKind::Exp;
    if (s == "p1") return TransformKind::P1;
    if (s == "p2") return TransformKind::P2;
    if (s == "r01") return TransformKind::R01;
    throw ArgumentError("unknown transform: " + std::string(s));
}

std::shared_ptr<const PhiSeries> cached_phi_series(const Real& r, const PrecisionContext& ctx)
{
    static std::mutex mu;
    static std::map<std::pair<std::string, int>, std::shared_ptr<const PhiSeries>> cache;
    auto key = std::make_pair(r.exact_str(), ctx.bits);
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto s = std::make_shared<const PhiSeries>(make_phi_series(r, ctx));
    std::lock_guard<std::mutex> lk(mu);
    return cache.emplace(key, std::move(s)).first->second;
}

Transform::Transform(TransformKind kind, const Real& r, const PrecisionContext& ctx)
    : kind_(kind), r_(r), bits_(ctx.bits)
{
    if (!(r > 0) || !(r < 1)) throw DomainError("transform: r must lie in (0,1)");
    PrecisionScope ps(ctx.bits + kGuard);
    switch (kind) {
    case TransformKind::P1:
        c1_ = ldexp(1 - r, -1);
        c0_ = ldexp(1 + r, -1);
        break;
    case TransformKind::P2: {
        Real s = sqrt(r);
        c1_ = ldexp(1 - s, -1);
        c0_ = ldexp(1 + s, -1);
        break;
    }
    case TransformKind::Exp:
        c1_ = ldexp(-log(r), -1);
        c0_ = sqrt(r);
        break;
    case TransformKind::R01:
        c1_ = 2 * r / (1 - r);
        c0_ = (1 + r) / (1 - r);
        break;
    case TransformKind::Phi:
        phi_ = cached_phi_series(r, ctx);
        break;
    }
}

Real Transform::eval(const Real& u) const
{
    if (!(u >= -1) || !(u <= 1)) throw DomainError("transform: u must lie in [-1,1]");
    if (u == -1) return Real(r_);
    if (u == 1) return Real(1);
    switch (kind_) {
    case TransformKind::P1: return c1_ * u + c0_;
    case TransformKind::P2: return sqr(c1_ * u + c0_);
    case TransformKind::Exp: return c0_ * exp(c1_ * u);
    case TransformKind::R01: return c1_ / (c0_ - u);
    case TransformKind::Phi: return phi_eval(*phi_, u);
    }
    return Real(0);
}

Real Transform::deriv(const Real& u) const
{
    if (!(u >= -1) || !(u <= 1)) throw DomainError("transform: u must lie in [-1,1]");
    switch (kind_) {
    case TransformKind::P1: return Real(c1_) + 0;
    case TransformKind::P2: return 2 * c1_ * (c1_ * u + c0_);
    case TransformKind::Exp: return c1_ * c0_ * exp(c1_ * u);
    case TransformKind::R01: return c1_ / sqr(c0_ - u);
    case TransformKind::Phi: return phi_deriv(*phi_, u);
    }
    return Real(0);
}

Real Transform::rho_hat() const
{
    PrecisionScope ps(bits_ + kGuard);
    const Real s = sqrt(r_);
    switch (kind_) {
    case TransformKind::Phi: return 1 / phi_->bundle.q;
    case TransformKind::P1:
    case TransformKind::R01: return (1 + s) / (1 - s);
    case TransformKind::P2: return (sqrt(1 + r_) + sqrt(2 * s)) / (1 - s);
    case TransformKind::Exp: {
        Real t = const_pi() / log(1 / r_);
        return t + sqrt(sqr(t) + 1);
    }
    }
    return Real(0);
}

} // namespace esk
