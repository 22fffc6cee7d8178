#include "collapse_lab/state.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace clab {

namespace {
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
constexpr double kNormTol = 1e-12;

void require_particle_index(const PureState& state, int particle, const char* what) {
    if (particle < 0 || particle >= state.n_particles()) {
        std::ostringstream msg;
        msg << what << " index " << particle << " out of range [0, " << state.n_particles() << ")";
        throw DomainError(msg.str());
    }
}
}  // namespace

PureState::PureState(int n_particles, std::vector<Amplitude> amplitudes, std::vector<Basis> basis_tags)
    : n_particles_(n_particles), amplitudes_(std::move(amplitudes)), basis_tags_(std::move(basis_tags)) {
    if (n_particles_ < 1) throw DomainError("state needs at least one particle");
    if (amplitudes_.size() != (1ULL << n_particles_))
        throw DomainError("amplitude array length must be 2^n_particles");
    if (basis_tags_.size() != static_cast<std::size_t>(n_particles_))
        throw DomainError("one basis tag per particle required");
    check_invariants();
}

double PureState::norm_sq() const {
    double total = 0.0;
    for (const Amplitude& a : amplitudes_) total += std::norm(a);
    return total;
}

void PureState::check_invariants() const {
    for (const Amplitude& a : amplitudes_) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw DomainError("non-finite amplitude");
    }
    if (std::abs(norm_sq() - 1.0) > kNormTol) throw DomainError("state not normalized");
}

std::string PureState::outcome_bitstring(std::uint64_t index) const {
    std::string bits(static_cast<std::size_t>(n_particles_), '0');
    for (int p = 0; p < n_particles_; ++p)
        if (bit_is_down(index, p)) bits[static_cast<std::size_t>(p)] = '1';
    return bits;
}

PureState make_initial_state(int n_detectors, int max_particles) {
    if (n_detectors < 0) throw DomainError("n_detectors must be nonnegative");
    const int n = n_detectors + 1;
    if (n > max_particles) {
        std::ostringstream msg;
        msg << "register of " << n << " particles exceeds the configured maximum of " << max_particles;
        throw CapacityError(msg.str());
    }
    std::vector<Amplitude> amps(1ULL << n, Amplitude{0.0, 0.0});
    const std::uint64_t all_down = (1ULL << n) - 1ULL;
    amps[all_down & ~1ULL] = Amplitude{kInvSqrt2, 0.0};  // subject up, detectors down
    amps[all_down] = Amplitude{kInvSqrt2, 0.0};          // subject down, detectors down
    return PureState(n, std::move(amps), std::vector<Basis>(static_cast<std::size_t>(n), Basis::X));
}

PureState apply_controlled_flip(PureState state, int target, int control) {
    require_particle_index(state, target, "target");
    require_particle_index(state, control, "control");
    if (target == control) throw DomainError("control and target must differ");
    if (state.basis_tag(control) != Basis::X || state.basis_tag(target) != Basis::X)
        throw DomainError("controlled flip is defined in the x basis");

    const std::uint64_t cmask = 1ULL << control;
    const std::uint64_t tmask = 1ULL << target;
    auto& amps = state.amplitudes();
    for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
        // control up (bit 0), target up: swap with the target-down partner
        if ((idx & cmask) == 0 && (idx & tmask) == 0) std::swap(amps[idx], amps[idx | tmask]);
    }
    return state;
}

PureState change_basis(PureState state, const std::vector<int>& particle_indices) {
    for (int p : particle_indices) require_particle_index(state, p, "particle");
    auto& amps = state.amplitudes();
    for (int p : particle_indices) {
        const std::uint64_t pmask = 1ULL << p;
        for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
            if (idx & pmask) continue;
            const Amplitude up = amps[idx];
            const Amplitude down = amps[idx | pmask];
            amps[idx] = (up + down) * kInvSqrt2;
            amps[idx | pmask] = (up - down) * kInvSqrt2;
        }
        state.set_basis_tag(p, state.basis_tag(p) == Basis::X ? Basis::Z : Basis::X);
    }
    return state;
}

std::vector<double> born_probabilities(const PureState& state) {
    std::vector<double> probs(state.dim());
    for (std::uint64_t idx = 0; idx < probs.size(); ++idx) probs[idx] = std::norm(state.amplitudes()[idx]);
    return probs;
}

BranchDecomposition branch_decompose(const PureState& state, const BranchPredicate& interacting) {
    BranchDecomposition d;
    const auto& amps = state.amplitudes();
    for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
        const double mass = std::norm(amps[idx]);
        if (mass == 0.0) continue;
        if (interacting(idx)) {
            d.interacting_set.push_back(idx);
            d.mass_interacting += mass;
        } else {
            d.noninteracting_set.push_back(idx);
            d.mass_noninteracting += mass;
        }
    }
    return d;
}

ParityClass parity_classify(std::uint64_t outcome, int begin, int end) {
    std::uint64_t mask = 0;
    for (int p = begin; p < end; ++p) mask |= 1ULL << p;
    return (std::popcount(outcome & mask) % 2 == 0) ? ParityClass::EVEN : ParityClass::ODD;
}

std::uint64_t sample_outcome(const PureState& state, RngStream& rng) {
    const double u = rng.next_unit();
    double cumulative = 0.0;
    std::uint64_t last_nonzero = 0;
    const auto& amps = state.amplitudes();
    for (std::uint64_t idx = 0; idx < amps.size(); ++idx) {
        const double p = std::norm(amps[idx]);
        if (p == 0.0) continue;
        cumulative += p;
        last_nonzero = idx;
        if (u < cumulative) return idx;
    }
    return last_nonzero;  // u fell into rounding slack at the top
}

}  // namespace clab
