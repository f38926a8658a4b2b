#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "finsler/embedding.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// `id<TAB>coord_1<TAB>...<TAB>coord_m` with a header row; 17 significant
/// digits so values round-trip exactly.
void write_coords_tsv(std::ostream& out, const RowMatrix& coords);
RowMatrix read_coords_tsv(std::istream& in);
void save_coords_tsv(const std::filesystem::path& path, const RowMatrix& coords);
RowMatrix load_coords_tsv(const std::filesystem::path& path);

/// `epoch<TAB><name>` rows, epochs counted from 1.
void write_trace_tsv(std::ostream& out, std::span<const double> trace, const std::string& name);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace finsler
