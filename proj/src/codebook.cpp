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

#include "beamlab/codebook.hpp"

#include "beamlab/csv.hpp"
#include "beamlab/signal_core.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace beamlab
{

int CodebookConfig::stages() const
{
    if (n_stages > 0)
        return n_stages;
    int s = 0;
    long long span = 1;
    while (span * branching <= n_antennas)
    {
        span *= branching;
        ++s;
    }
    return s;
}

int CodebookConfig::block_size(int stage) const
{
    long long span = n_antennas;
    for (int s = 0; s < stage; ++s)
        span /= branching;
    return static_cast<int>(span);
}

void CodebookConfig::validate() const
{
    if (n_antennas < 1)
        throw std::invalid_argument("codebook needs at least one antenna");
    if (branching < 2)
        throw std::invalid_argument("branching factor K must be at least 2");
    const int s = stages();
    if (s < 1)
        throw std::invalid_argument("K = " + std::to_string(branching) + " exceeds N = " + std::to_string(n_antennas));
    long long leaves = 1;
    for (int i = 0; i < s; ++i)
        leaves *= branching;
    if (leaves > n_antennas || n_antennas % leaves != 0)
        throw std::invalid_argument("K^S = " + std::to_string(leaves) + " must divide N = " + std::to_string(n_antennas));
}

std::vector<int> IndexRange::indices() const
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max(0, size())));
    for (int i = begin; i < end; ++i)
        out.push_back(i);
    return out;
}

ComplexMatrix dictionary(int n, double spacing_over_wavelength)
{
    if (n < 1)
        throw std::invalid_argument("dictionary size must be positive");
    const ArrayConfig cfg{n, spacing_over_wavelength};
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        a.col(i) = array_response_cos(cfg, grid_cosine(i, n, spacing_over_wavelength));
    return a;
}

IndexRange subspace_mask(int stage, int k, const CodebookConfig& cfg, IndexRange parent)
{
    cfg.validate();
    if (stage < 1 || stage > cfg.stages())
        throw std::out_of_range("stage " + std::to_string(stage) + " outside [1, " + std::to_string(cfg.stages()) + "]");
    if (k < 1 || k > cfg.branching)
        throw std::out_of_range("subspace " + std::to_string(k) + " outside [1, " + std::to_string(cfg.branching) + "]");
    const int parent_size = cfg.block_size(stage - 1);
    if (parent.size() != parent_size || parent.begin < 0 || parent.end > cfg.n_antennas || parent.begin % parent_size != 0)
        throw std::invalid_argument("parent range is not a stage-" + std::to_string(stage - 1) + " block");
    const int child = cfg.block_size(stage);
    return {parent.begin + (k - 1) * child, parent.begin + k * child};
}

IndexRange mask_for_path(const CodebookConfig& cfg, std::span<const int> path)
{
    IndexRange range{0, cfg.n_antennas};
    int stage = 1;
    for (int k : path)
        range = subspace_mask(stage++, k, cfg, range);
    return range;
}

ComplexMatrix synthesis_matrix(const ComplexMatrix& dict)
{
    if (dict.rows() != dict.cols())
        throw std::invalid_argument("dictionary must be square");
    const ComplexMatrix gram = dict * dict.adjoint();
    Eigen::FullPivLU<ComplexMatrix> lu(gram);
    if (!lu.isInvertible())
        throw std::runtime_error("dictionary Gram matrix is singular");
    return lu.solve(dict);
}

BeamSolution solve_beamformer(const ComplexMatrix& dict, const ComplexMatrix& synthesis, std::span<const int> mask)
{
    const auto n = dict.rows();
    if (mask.empty())
        throw std::invalid_argument("beam mask is empty");
    ComplexVector target = ComplexVector::Zero(n);
    for (int i : mask)
    {
        if (i < 0 || i >= n)
            throw std::out_of_range("mask index " + std::to_string(i) + " outside the grid");
        target(i) = 1.0; // any positive level; rescaled below
    }
    ComplexVector f = synthesis * target;
    const double norm = f.norm();
    if (!(norm > 0.0))
        throw std::runtime_error("beam synthesis produced a zero vector");
    f /= norm;

    const ComplexVector response = dict.adjoint() * f;
    double sum = 0.0;
    for (int i : mask)
        sum += std::abs(response(i));
    return {std::move(f), sum / static_cast<double>(mask.size())};
}

BeamSolution solve_beamformer(const ComplexMatrix& dict, std::span<const int> mask)
{
    return solve_beamformer(dict, synthesis_matrix(dict), mask);
}

CodebookStage build_codebook(const CodebookConfig& cfg, std::span<const int> parent_path)
{
    cfg.validate();
    const int stage = static_cast<int>(parent_path.size()) + 1;
    if (stage > cfg.stages())
        throw std::out_of_range("codebook resolution exhausted after " + std::to_string(cfg.stages()) + " stages");
    const ComplexMatrix dict = dictionary(cfg.n_antennas, cfg.spacing_over_wavelength);
    const ComplexMatrix synth = synthesis_matrix(dict);
    const IndexRange parent = mask_for_path(cfg, parent_path);

    CodebookStage out;
    out.stage = stage;
    double gain_sum = 0.0;
    for (int k = 1; k <= cfg.branching; ++k)
    {
        const IndexRange mask = subspace_mask(stage, k, cfg, parent);
        const auto idx = mask.indices();
        auto sol = solve_beamformer(dict, synth, idx);
        gain_sum += sol.gain;
        out.beams.push_back(std::move(sol.beamformer));
        out.masks.push_back(mask);
    }
    out.gain = gain_sum / cfg.branching;
    return out;
}

Codebook::Codebook(const CodebookConfig& cfg) : cfg_(cfg)
{
    cfg_.validate();
    stages_ = cfg_.stages();
    dict_ = dictionary(cfg_.n_antennas, cfg_.spacing_over_wavelength);
    const ComplexMatrix synth = synthesis_matrix(dict_);

    beams_.resize(static_cast<std::size_t>(stages_));
    gains_.resize(static_cast<std::size_t>(stages_));
    for (int s = 1; s <= stages_; ++s)
    {
        const int block = cfg_.block_size(s);
        const int count = cfg_.n_antennas / block;
        auto& row = beams_[static_cast<std::size_t>(s - 1)];
        row.reserve(static_cast<std::size_t>(count));
        double gain_sum = 0.0;
        for (int b = 0; b < count; ++b)
        {
            const auto idx = IndexRange{b * block, (b + 1) * block}.indices();
            auto sol = solve_beamformer(dict_, synth, idx);
            gain_sum += sol.gain;
            row.push_back(std::move(sol.beamformer));
        }
        gains_[static_cast<std::size_t>(s - 1)] = gain_sum / count;
    }
}

const ComplexVector& Codebook::beam(int stage, int block) const
{
    if (stage < 1 || stage > stages_)
        throw std::out_of_range("stage out of range");
    const auto& row = beams_[static_cast<std::size_t>(stage - 1)];
    if (block < 0 || block >= static_cast<int>(row.size()))
        throw std::out_of_range("block out of range");
    return row[static_cast<std::size_t>(block)];
}

IndexRange Codebook::block_mask(int stage, int block) const
{
    const int size = cfg_.block_size(stage);
    return {block * size, (block + 1) * size};
}

double Codebook::gain(int stage) const
{
    if (stage < 1 || stage > stages_)
        throw std::out_of_range("stage out of range");
    return gains_[static_cast<std::size_t>(stage - 1)];
}

int Codebook::block_of(int stage, int grid_index) const
{
    return grid_index / cfg_.block_size(stage);
}

CodebookStage Codebook::stage_for(std::span<const int> parent_path) const
{
    const int stage = static_cast<int>(parent_path.size()) + 1;
    if (stage > stages_)
        throw std::out_of_range("codebook resolution exhausted after " + std::to_string(stages_) + " stages");
    const IndexRange parent = mask_for_path(cfg_, parent_path);
    const int first = parent.begin / cfg_.block_size(stage);
    CodebookStage out;
    out.stage = stage;
    out.gain = gain(stage);
    for (int k = 0; k < cfg_.branching; ++k)
    {
        out.beams.push_back(beam(stage, first + k));
        out.masks.push_back(block_mask(stage, first + k));
    }
    return out;
}

void write_codebook_csv(std::ostream& out, const Codebook& book)
{
    CsvWriter csv(out);
    std::vector<std::string> header{"stage", "k", "block", "gain"};
    for (int i = 0; i < book.n_antennas(); ++i)
    {
        header.push_back("re_" + std::to_string(i));
        header.push_back("im_" + std::to_string(i));
    }
    csv.row(header);
    for (int s = 1; s <= book.stages(); ++s)
    {
        const int count = book.n_antennas() / book.config().block_size(s);
        for (int b = 0; b < count; ++b)
        {
            std::vector<std::string> cells{std::to_string(s), std::to_string(b % book.branching() + 1),
                                           std::to_string(b), format_real(book.gain(s))};
            const auto& f = book.beam(s, b);
            for (Eigen::Index i = 0; i < f.size(); ++i)
            {
                cells.push_back(format_real(f(i).real()));
                cells.push_back(format_real(f(i).imag()));
            }
            csv.row(cells);
        }
    }
}

} // namespace beamlab
