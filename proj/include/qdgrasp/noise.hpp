#ifndef QDGRASP_NOISE_HPP
#define QDGRASP_NOISE_HPP

#include <qdgrasp/rng.hpp>
#include <qdgrasp/se3.hpp>

#include <cstdint>
#include <stdexcept>

namespace qdgrasp {

/// Domain-randomization noise families. Defaults stand in for measured
/// hardware noise and should be replaced by calibrated values.
struct NoiseSpec {
    double object_sigma_pos = 0.005; // m per axis
    double object_sigma_rot = 0.02;  // rad per axis
    double joint_sigma = 0.005;      // rad (or m) per joint and waypoint
    double mass_sigma_rel = 0.0;
    double com_sigma = 0.0;    // m per axis
    double margin_sigma = 0.0; // m
    std::size_t samples = 16;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (object_sigma_pos < 0 || object_sigma_rot < 0 || joint_sigma < 0 || mass_sigma_rel < 0 || com_sigma < 0 ||
            margin_sigma < 0)
            throw std::invalid_argument("noise sigmas must be non-negative");
        if (samples < 1)
            throw std::invalid_argument("noise spec needs at least one sample");
    }

    static NoiseSpec zero(std::size_t samples = 1, std::uint64_t seed = 0)
    {
        NoiseSpec s;
        s.object_sigma_pos = s.object_sigma_rot = s.joint_sigma = 0.0;
        s.samples = samples;
        s.seed = seed;
        return s;
    }
};

/// Concrete draws for one perturbed roll-out. Joint offsets are generated on
/// demand from a counter-based key, so a sample covers any trajectory length.
struct NoiseSample {
    RigidTransform object_offset; // rotation about the object origin, then world translation
    double mass_scale = 1.0;
    Vec3 com_offset = Vec3::Zero();
    double margin_offset = 0.0;
    double joint_sigma = 0.0;
    std::uint64_t joint_key = 0;

    double joint_offset(std::size_t step, std::size_t joint) const
    {
        if (joint_sigma == 0.0)
            return 0.0;
        CounterRng rng(derive_key(joint_key, (static_cast<std::uint64_t>(step) << 8) | joint));
        return rng.gaussian(joint_sigma);
    }

    RigidTransform perturb_pose(const RigidTransform& pose) const
    {
        return {object_offset.rotation() * pose.rotation(), pose.translation() + object_offset.translation()};
    }

    /// Keeps only the selected families; the others become identity offsets.
    NoiseSample restricted(bool object, bool joints, bool dynamics) const
    {
        NoiseSample out;
        if (object)
            out.object_offset = object_offset;
        if (joints) {
            out.joint_sigma = joint_sigma;
            out.joint_key = joint_key;
        }
        if (dynamics) {
            out.mass_scale = mass_scale;
            out.com_offset = com_offset;
            out.margin_offset = margin_offset;
        }
        return out;
    }
};

/// Zero-mean Gaussian draws, a pure function of (spec, index).
inline NoiseSample sample_noise(const NoiseSpec& spec, std::size_t index)
{
    spec.validate();
    if (index >= spec.samples)
        throw std::out_of_range("noise sample index " + std::to_string(index) + " >= spec.samples " +
                                std::to_string(spec.samples));
    CounterRng rng = CounterRng(spec.seed).split(index);
    NoiseSample s;
    Vec3 dp, dr;
    for (int i = 0; i < 3; ++i)
        dp[i] = rng.gaussian(spec.object_sigma_pos);
    for (int i = 0; i < 3; ++i)
        dr[i] = rng.gaussian(spec.object_sigma_rot);
    s.object_offset = RigidTransform(rotation_exp(dr), dp);
    s.mass_scale = std::max(0.05, 1.0 + rng.gaussian(spec.mass_sigma_rel));
    for (int i = 0; i < 3; ++i)
        s.com_offset[i] = rng.gaussian(spec.com_sigma);
    s.margin_offset = rng.gaussian(spec.margin_sigma);
    s.joint_sigma = spec.joint_sigma;
    s.joint_key = rng.next_u64();
    return s;
}

} // namespace qdgrasp

#endif
