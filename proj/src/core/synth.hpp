#pragma once

#include <cstdint>
#include <string>

#include "core/types.hpp"

namespace logosp {

// Synthetic dataset: axis-aligned planar patches ("objects") on a sparse
// lattice, one class per object, per-point features = class mean + isotropic
// noise. Geometry is spaced so region growing recovers each patch as one
// superpoint, which ties feature clusters to geometric objects.
struct SynthConfig {
    int scenes = 20;           // H
    int classes = 5;           // C
    int objects_per_scene = 8;
    int feature_dim = 16;      // D
    double separation = 10.0;  // min L2 distance between class feature means
    double noise_sigma = 0.1;
    uint64_t rng_seed = 42;
    double patch_size = 1.0;  // object extent, meters
    double grid_step = 0.025; // point spacing on a patch, meters

    void validate() const;
};

// Writes clouds/<id>.ply, features/<id>.lgspfeat, gt/<id>.lgsplbl and
// manifest.json under out_dir; returns the manifest. Byte-identical output
// for a fixed seed.
DatasetManifest synth_scenes(const SynthConfig& config, const std::string& out_dir);

}  // namespace logosp
