// Exact pure-state representation of a small register of two-level particles.
//
// Basis convention: basis states are indexed by bitstrings; bit i of an index
// is particle i (particle 0 is the subject), bit value 0 = spin up,
// 1 = spin down. Each particle carries a basis tag (X or Z) so that states
// mixing bases mid-protocol cannot be misread silently.

#ifndef COLLAPSE_LAB_STATE_HPP
#define COLLAPSE_LAB_STATE_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/rng.hpp"

namespace clab {

using Amplitude = std::complex<double>;

enum class Basis : std::uint8_t { X, Z };

enum class ParityClass : std::uint8_t { EVEN, ODD };

inline const char* to_string(ParityClass p) { return p == ParityClass::EVEN ? "EVEN" : "ODD"; }

// Default register cap: 24 particles = 16M amplitudes.
inline constexpr int kDefaultMaxParticles = 24;

class PureState {
public:
    PureState(int n_particles, std::vector<Amplitude> amplitudes, std::vector<Basis> basis_tags);

    int n_particles() const { return n_particles_; }
    std::uint64_t dim() const { return amplitudes_.size(); }

    const std::vector<Amplitude>& amplitudes() const { return amplitudes_; }
    std::vector<Amplitude>& amplitudes() { return amplitudes_; }

    Basis basis_tag(int particle) const { return basis_tags_.at(static_cast<std::size_t>(particle)); }
    const std::vector<Basis>& basis_tags() const { return basis_tags_; }
    void set_basis_tag(int particle, Basis b) { basis_tags_.at(static_cast<std::size_t>(particle)) = b; }

    double norm_sq() const;

    // Throws DomainError if the norm is off by more than 1e-12 or any
    // amplitude is non-finite.
    void check_invariants() const;

    static bool bit_is_down(std::uint64_t index, int particle) {
        return ((index >> particle) & 1ULL) != 0;
    }

    // Renders an outcome index as '0'(up)/'1'(down) characters, particle 0 first.
    std::string outcome_bitstring(std::uint64_t index) const;

private:
    int n_particles_;
    std::vector<Amplitude> amplitudes_;
    std::vector<Basis> basis_tags_;
};

// Binary split of the support into interacting / noninteracting sets with
// their squared-amplitude masses. A degenerate split (all mass on one side)
// is a signal the caller inspects, not an exception: the collapse engine
// reads it as the absorption condition.
struct BranchDecomposition {
    std::vector<std::uint64_t> interacting_set;
    std::vector<std::uint64_t> noninteracting_set;
    double mass_interacting = 0.0;
    double mass_noninteracting = 0.0;

    bool is_degenerate() const { return mass_interacting == 0.0 || mass_noninteracting == 0.0; }
};

using BranchPredicate = std::function<bool(std::uint64_t)>;

// Subject in (|x up> + |x down>)/sqrt(2), n_detectors detector particles all
// |x down>. Throws CapacityError when n_detectors + 1 > max_particles.
PureState make_initial_state(int n_detectors, int max_particles = kDefaultMaxParticles);

// Unitary controlled flip: within every basis component where the control
// particle is x-up, the target bit is flipped. Control and target must be
// X-tagged.
PureState apply_controlled_flip(PureState state, int target, int control = 0);

// X<->Z rotation on each listed particle: |x up> = (|z up> + |z down>)/sqrt(2),
// |x down> = (|z up> - |z down>)/sqrt(2), and the same matrix back. Flips the
// basis tags. Involution.
PureState change_basis(PureState state, const std::vector<int>& particle_indices);

// Squared magnitudes, indexed by basis bitstring.
std::vector<double> born_probabilities(const PureState& state);

// Splits the support (amplitudes that are not exactly zero) by predicate.
BranchDecomposition branch_decompose(const PureState& state, const BranchPredicate& interacting);

// EVEN iff the number of down (1) bits over particles [begin, end) is even.
ParityClass parity_classify(std::uint64_t outcome, int begin, int end);

// Draws one basis index from born_probabilities(state).
std::uint64_t sample_outcome(const PureState& state, RngStream& rng);

}  // namespace clab

#endif
