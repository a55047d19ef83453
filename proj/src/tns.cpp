#include "topokern/tns.hpp"

#include <cstring>
#include <fstream>

#include "topokern/error.hpp"

namespace topokern::io {

namespace {

void putU32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xFF),
                            static_cast<unsigned char>((v >> 8) & 0xFF),
                            static_cast<unsigned char>((v >> 16) & 0xFF),
                            static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t getU32(std::istream& in) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        fail(ErrorCode::CorruptHeader, "TNS1: truncated header");
    return static_cast<std::uint32_t>(buf[0]) | (static_cast<std::uint32_t>(buf[1]) << 8) |
           (static_cast<std::uint32_t>(buf[2]) << 16) |
           (static_cast<std::uint32_t>(buf[3]) << 24);
}

} // namespace

void writeTns(const std::string& path, const TnsTensor& t) {
    std::size_t count = 1;
    for (std::uint32_t d : t.dims) count *= d;
    if (count != t.values.size())
        fail(ErrorCode::ShapeMismatch, "TNS1: dims do not match value count");

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "TNS1: cannot write " + path);
    out.write("TNS1", 4);
    putU32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) putU32(out, d);
    for (float v : t.values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        putU32(out, bits);
    }
    if (!out) fail(ErrorCode::IoError, "TNS1: write failed for " + path);
}

TnsTensor readTns(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "TNS1: cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "TNS1", 4) != 0)
        fail(ErrorCode::CorruptHeader, "TNS1: bad magic in " + path);

    TnsTensor t;
    const std::uint32_t rank = getU32(in);
    if (rank > 8) fail(ErrorCode::CorruptHeader, "TNS1: implausible rank");
    t.dims.resize(rank);
    std::size_t count = 1;
    for (auto& d : t.dims) {
        d = getU32(in);
        count *= d;
    }
    t.values.resize(count);
    for (auto& v : t.values) {
        const std::uint32_t bits = getU32(in);
        std::memcpy(&v, &bits, 4);
    }
    return t;
}

} // namespace topokern::io
