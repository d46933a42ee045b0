/*
 *   Copyright 2026 The beamlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BEAMLAB_CODEBOOK_HPP
#define BEAMLAB_CODEBOOK_HPP

#include "beamlab/types.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace beamlab
{

struct CodebookConfig
{
    int n_antennas = 64;
    int branching = 2;
    int n_stages = 0; // 0 selects the deepest stage count that fits the grid
    double spacing_over_wavelength = 0.5;

    /// Resolved stage count S.
    int stages() const;
    /// Grid points covered by one subspace at `stage` (N / K^stage).
    int block_size(int stage) const;
    void validate() const;
};

/// Half-open run of dictionary grid indices [begin, end).
struct IndexRange
{
    int begin = 0;
    int end = 0;

    int size() const { return end - begin; }
    bool contains(int i) const { return i >= begin && i < end; }
    std::vector<int> indices() const;
    bool operator==(const IndexRange&) const = default;
};

/// N x N matrix whose column i is the array response at grid point i
/// (spatial frequency i / N). Unitary for every N.
ComplexMatrix dictionary(int n, double spacing_over_wavelength = 0.5);

/// Subspace k (1-based) of `parent` at `stage` (1-based). `parent` must be a
/// stage-(stage-1) block, i.e. the full grid for stage 1.
IndexRange subspace_mask(int stage, int k, const CodebookConfig& cfg, IndexRange parent);

/// Block reached by following `path` (1-based choices, one per completed stage).
IndexRange mask_for_path(const CodebookConfig& cfg, std::span<const int> path);

struct BeamSolution
{
    ComplexVector beamformer;
    double gain = 0.0; // C_s: mean in-mask response magnitude after unit-norm scaling
};

/// Least-squares beam for the target that is constant on `mask` and zero elsewhere:
/// f = (A A^H)^-1 A z, rescaled to unit norm.
BeamSolution solve_beamformer(const ComplexMatrix& dict, std::span<const int> mask);

/// Same solve with the precomputed synthesis matrix (A A^H)^-1 A.
BeamSolution solve_beamformer(const ComplexMatrix& dict, const ComplexMatrix& synthesis, std::span<const int> mask);

/// (A A^H)^-1 A; throws if A A^H is singular.
ComplexMatrix synthesis_matrix(const ComplexMatrix& dict);

/// The K beams that refine one parent subspace.
struct CodebookStage
{
    int stage = 1;
    std::vector<ComplexVector> beams; // index k-1
    std::vector<IndexRange> masks;
    double gain = 0.0; // C_s
};

CodebookStage build_codebook(const CodebookConfig& cfg, std::span<const int> parent_path);

/// Every beam of every stage, built once. Immutable after construction.
class Codebook
{
public:
    explicit Codebook(const CodebookConfig& cfg);

    const CodebookConfig& config() const { return cfg_; }
    int stages() const { return stages_; }
    int branching() const { return cfg_.branching; }
    int n_antennas() const { return cfg_.n_antennas; }

    /// Beam for grid block `block` (0..K^stage - 1) at `stage`.
    const ComplexVector& beam(int stage, int block) const;
    IndexRange block_mask(int stage, int block) const;
    /// C_s.
    double gain(int stage) const;

    /// Block index at `stage` of the subspace containing grid index `i`.
    int block_of(int stage, int grid_index) const;

    CodebookStage stage_for(std::span<const int> parent_path) const;

    const ComplexMatrix& dictionary_matrix() const { return dict_; }

private:
    CodebookConfig cfg_;
    int stages_ = 0;
    ComplexMatrix dict_;
    std::vector<std::vector<ComplexVector>> beams_; // [stage-1][block]
    std::vector<double> gains_;
};

/// One CSV row per beam: stage,k,block,gain,re_0,im_0,...,re_{N-1},im_{N-1}.
void write_codebook_csv(std::ostream& out, const Codebook& book);

} // namespace beamlab

#endif // BEAMLAB_CODEBOOK_HPP
