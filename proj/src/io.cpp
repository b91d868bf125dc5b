#include "tpf/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

#include "tpf/error.hpp"

namespace fs = std::filesystem;

namespace tpf::io {

std::vector<fs::path> list_text_files(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorKind::Io, "not a directory: " + root.string());
    }
    std::vector<fs::path> out;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        const fs::path& p = it->path();
        if (p.extension() != ".txt") continue;
        std::error_code sec;
        // Dangling symlinks are kept so the reader records them as skipped.
        if (it->is_directory(sec)) continue;
        out.push_back(p);
    }
    if (ec) throw Error(ErrorKind::Io, "cannot walk " + root.string() + ": " + ec.message());
    std::sort(out.begin(), out.end(), [&](const fs::path& a, const fs::path& b) {
        return a.lexically_relative(root).generic_string() < b.lexically_relative(root).generic_string();
    });
    return out;
}

std::string doc_id_for(const fs::path& root, const fs::path& file) {
    fs::path rel = file.lexically_relative(root);
    if (rel.extension() == ".txt") rel.replace_extension();
    return rel.generic_string();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::Io, "read failed: " + path.string());
    return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
    }
}

}  // namespace tpf::io
