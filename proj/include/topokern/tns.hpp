#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace topokern::io {

/// TNS1 binary tensor: magic "TNS1", uint32-LE rank, rank x uint32-LE dims,
/// then binary32-LE values row-major.
struct TnsTensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> values;
};

void writeTns(const std::string& path, const TnsTensor& t);
TnsTensor readTns(const std::string& path);

} // namespace topokern::io
