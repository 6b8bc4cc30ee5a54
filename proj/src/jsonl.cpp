#include "proofjudge/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "proofjudge/errors.hpp"

namespace proofjudge {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& on_object) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw DataError(path.filename().string() + " line " +
                            std::to_string(line_no) + ": not a JSON object");
        }
        on_object(line_no, obj);
    }
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& objects) {
    std::ostringstream out;
    for (const auto& obj : objects) {
        out << obj.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write file: " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw DataError("short write: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace proofjudge
