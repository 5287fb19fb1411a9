#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "balab/forms.hpp"
#include "balab/grid.hpp"
#include "balab/spacetime.hpp"

namespace balab {

/**
 * Binary field container (little-endian, fixed-width):
 *
 *   magic  "BLBF", u32 version = 1
 *   u32 n, u32 resolution, u32 naxes, u32 axes[naxes], f64 periods[2n]
 *   u32 kind          (0: complex form, 1: space-time field)
 *   form:       u32 nterms, then per term u32 maskJ, u32 maskK,
 *               f64 re/im pairs per grid point (row-major)
 *   space-time: u32 rows, then rows × points f64 (row-major)
 *
 * Readers validate the header and throw std::runtime_error with the byte
 * offset or field that disagrees; writers refuse paths they cannot create.
 */
void write_form(const std::filesystem::path& path, const ComplexForm& f);
ComplexForm read_form(const std::filesystem::path& path);

void write_spacetime(const std::filesystem::path& path, const SpaceTimeField& f);
SpaceTimeField read_spacetime(const std::filesystem::path& path);

/** A plain spatial field travels as a one-row space-time container. */
void write_real_field(const std::filesystem::path& path, const GridDomain& g, const RealField& f);
RealField read_real_field(const std::filesystem::path& path, GridDomain* grid_out = nullptr);

/** CSV with a header row; cells are shortest-roundtrip numbers. */
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/**
 * All-or-nothing output directory: artifacts are written under stage(), and
 * commit() renames the staging directory to the final path, so a crashed or
 * failed run never leaves a partial directory at the destination. The final
 * path must not already exist (refused at construction). A destructor without
 * commit() removes the staging directory.
 */
class OutputDir {
 public:
  explicit OutputDir(const std::filesystem::path& final_path);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  const std::filesystem::path& stage() const { return stage_; }
  void commit();

 private:
  std::filesystem::path final_;
  std::filesystem::path stage_;
  bool committed_ = false;
};

}  // namespace balab
