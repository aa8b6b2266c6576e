#include "sts/ingest/stream.hpp"

#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace fs = std::filesystem;

namespace sts::ingest {

void write_pbm(const std::string& path, const SilhouetteFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P4\n" << frame.width << " " << frame.height << "\n";
    const int row_bytes = (frame.width + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (int r = 0; r < frame.height; ++r) {
        std::fill(row.begin(), row.end(), 0);
        for (int c = 0; c < frame.width; ++c) {
            if (frame.bits[static_cast<std::size_t>(r) * frame.width + c]) {
                row[c >> 3] |= static_cast<std::uint8_t>(0x80u >> (c & 7));
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
    }
    if (!out) throw IoError("write failed for " + path);
}

SilhouetteFrame read_pbm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P4") throw FormatError(path + ": not a P4 bitmap");
    int w = 0, h = 0;
    in >> w >> h;
    if (!in || w < 1 || h < 1) throw FormatError(path + ": bad dimensions");
    in.get();  // single whitespace after the header
    SilhouetteFrame frame;
    frame.width = w;
    frame.height = h;
    frame.bits.assign(static_cast<std::size_t>(w) * h, 0);
    const int row_bytes = (w + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (int r = 0; r < h; ++r) {
        in.read(reinterpret_cast<char*>(row.data()), row_bytes);
        if (!in) throw FormatError(path + ": truncated pixel data");
        for (int c = 0; c < w; ++c) {
            frame.bits[static_cast<std::size_t>(r) * w + c] =
                (row[c >> 3] >> (7 - (c & 7))) & 1;
        }
    }
    return frame;
}

SilhouetteStreamReader::SilhouetteStreamReader(const std::string& dir) : dir_(dir) {
    const std::string manifest_path = (fs::path(dir) / "manifest.jsonl").string();
    manifest_.open(manifest_path, std::ios::binary);
    if (!manifest_) throw FormatError("silhouette stream: missing manifest " + manifest_path);
}

std::optional<SilhouetteFrame> SilhouetteStreamReader::next() {
    std::string line;
    while (std::getline(manifest_, line)) {
        if (line.empty()) continue;
        nlohmann::json entry;
        try {
            entry = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(dir_ + "/manifest.jsonl: bad JSON at frame " + std::to_string(index_) + ": " +
                              e.what());
        }
        if (!entry.contains("t") || !entry.contains("file") || !entry.contains("w") || !entry.contains("h")) {
            throw FormatError(dir_ + "/manifest.jsonl: frame " + std::to_string(index_) +
                              " missing one of t/file/w/h");
        }
        const std::string file = entry["file"].get<std::string>();
        const std::string frame_path = (fs::path(dir_) / file).string();
        if (!fs::exists(frame_path)) {
            throw IntegrityError(dir_ + "/manifest.jsonl: frame " + std::to_string(index_) +
                                 " references missing bitmap " + file);
        }
        SilhouetteFrame frame = read_pbm(frame_path);
        frame.timestamp = entry["t"].get<double>();
        if (frame.width != entry["w"].get<int>() || frame.height != entry["h"].get<int>()) {
            throw IntegrityError(frame_path + ": dimensions disagree with manifest");
        }
        if (index_ > 0 && !(frame.timestamp > last_timestamp_)) {
            throw IntegrityError(dir_ + "/manifest.jsonl: non-monotonic timestamp at frame index " +
                                 std::to_string(index_));
        }
        last_timestamp_ = frame.timestamp;
        ++index_;
        return frame;
    }
    return std::nullopt;
}

SilhouetteStreamWriter::SilhouetteStreamWriter(const std::string& dir) : dir_(dir) {
    fs::create_directories(dir);
    manifest_.open((fs::path(dir) / "manifest.jsonl").string(), std::ios::binary);
    if (!manifest_) throw IoError("cannot create manifest in " + dir);
}

SilhouetteStreamWriter::~SilhouetteStreamWriter() { close(); }

void SilhouetteStreamWriter::append(const SilhouetteFrame& frame) {
    char name[32];
    std::snprintf(name, sizeof(name), "f%06d.pbm", index_);
    write_pbm((fs::path(dir_) / name).string(), frame);
    manifest_ << "{\"t\": " << format_double(frame.timestamp) << ", \"file\": \"" << name
              << "\", \"w\": " << frame.width << ", \"h\": " << frame.height << "}\n";
    ++index_;
}

void SilhouetteStreamWriter::close() {
    if (manifest_.is_open()) {
        manifest_.flush();
        manifest_.close();
    }
}

}  // namespace sts::ingest
