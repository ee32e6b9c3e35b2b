#pragma once

// Plain-text dumps, CSV reports, PGM rasters and the run manifest.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cmem/diagnostics.hpp"
#include "cmem/freeboundary.hpp"
#include "cmem/geometry.hpp"
#include "cmem/optimizer.hpp"
#include "cmem/spectral.hpp"

namespace cmem {

/// "%.17g", the round-trip format used by every text output.
std::string fmt(double v);

/// First line "nx ny xmin xmax ymin ymax", then ny rows of nx values.
void write_field(const std::string& path, const ScalarField& field);
std::string field_text(const ScalarField& field);
/// Reads a dump written on the grid of `mask`; throws if the header differs.
ScalarField read_field(const std::string& path, const MaskPtr& mask);

/// Header line "lambda residual iterations" with values, then the field dump of u.
void write_eigenpair(const std::string& path, const EigenPair& pair);

/// Cell fractions of D as a field dump.
void write_region(const std::string& path, const CellSet& region, const MaskPtr& mask);
CellSet read_region(const std::string& path, const MaskPtr& mask);

/// 8-bit binary PGM, min-max scaled; returns the (min, max) used.
std::pair<double, double> write_pgm(const std::string& path, const Grid2D& grid,
                                    const std::vector<double>& values);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string history_csv(const std::vector<IterationRecord>& history);
std::string curve_csv(const LambdaCurve& curve);
std::string checks_csv(const std::vector<CheckRow>& rows);
std::string weiss_csv(const WeissProfile& profile);
std::string blowup_csv(const BlowupSequence& seq);
std::string contour_csv(const Contour& contour);

/// manifest.json: config hash, tolerances, sign convention and raster scales.
nlohmann::json manifest_base(const std::string& command, const std::string& config_hash);
void write_manifest(const std::string& dir, const nlohmann::json& manifest);

}  // namespace cmem
