#include "btm/synthetic.hpp"

#include "btm/io.hpp"

namespace btm {

void save_synthetic(const SyntheticDataset& s, const std::string& path) {
    if (s.y.size() != s.x.rows) throw DimError("save_synthetic: label count mismatch");
    io::BinaryWriter w(path);
    w.write_bytes("BTMD", 4);
    w.write_u32(1);
    w.write_u64(s.x.rows);
    w.write_u64(s.x.cols);
    w.write_f64_array(s.x.data.data(), s.x.data.size());
    for (double y : s.y) {
        const unsigned char label = y == 1.0 ? 1 : 0;
        w.write_bytes(&label, 1);
    }
}

SyntheticDataset load_synthetic(const std::string& path) {
    io::BinaryReader r(path);
    char magic[4];
    r.read_bytes(magic, 4, "magic");
    if (std::string(magic, 4) != "BTMD") throw FormatError("bad magic in " + path, 0);
    if (r.read_u32("version") != 1) throw FormatError("unsupported synthetic version", 4);
    const std::uint64_t n = r.read_u64("row count");
    const std::uint64_t d = r.read_u64("feature count");
    SyntheticDataset s;
    s.x = Matrix(n, d);
    r.read_f64_array(s.x.data.data(), s.x.data.size(), "features");
    s.y.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        unsigned char label;
        r.read_bytes(&label, 1, "label");
        if (label > 1) throw FormatError("label byte out of range", r.offset() - 1);
        s.y[i] = static_cast<double>(label);
    }
    if (!r.at_eof()) throw FormatError("trailing bytes after synthetic dataset", r.offset());
    std::size_t n_pos = 0;
    for (double y : s.y) n_pos += y == 1.0 ? 1 : 0;
    s.ipc = n_pos;
    return s;
}

}  // namespace btm
