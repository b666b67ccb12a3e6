#include "setplan/instance_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace setplan::core {

namespace fs = std::filesystem;
using nlohmann::json;

std::string serialize_instance(const Instance& instance) {
    std::string out;
    json header;
    header["record"] = "header";
    header["version"] = 1;
    header["kind"] = "instance";
    header["gallery_size"] = instance.gallery_size;
    header["ground_truth"] = instance.ground_truth.to_vector();
    header["query_text"] = instance.query_text;
    header["caption"] = instance.caption;
    out += header.dump();
    out += '\n';

    for (const auto& r : instance.pool) {
        json rec;
        rec["record"] = "retrieval";
        rec["id"] = r.id;
        rec["tool"] = r.tool;
        rec["query"] = r.query;
        rec["polarity"] = polarity_name(r.polarity);
        rec["k"] = r.k;
        rec["results"] = r.ranking;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

Instance parse_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Instance instance;
    bool have_header = false;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Data, std::string("bad instance record: ") + e.what());
        }
        const std::string kind = rec.value("record", "");
        if (kind == "header") {
            if (have_header) throw Error(ErrorKind::Data, "duplicate instance header");
            if (!rec.contains("version"))
                throw Error(ErrorKind::Data, "instance header missing version field");
            if (rec["version"].get<int>() != 1)
                throw Error(ErrorKind::Data, "unsupported instance format version");
            instance.gallery_size = rec.at("gallery_size").get<int>();
            instance.ground_truth = CandidateSet(instance.gallery_size);
            for (ImageId id : rec.at("ground_truth").get<std::vector<ImageId>>())
                instance.ground_truth.insert(id);
            instance.query_text = rec.value("query_text", "");
            instance.caption = rec.value("caption", "");
            have_header = true;
        } else if (kind == "retrieval") {
            if (!have_header)
                throw Error(ErrorKind::Data, "retrieval record before instance header");
            AtomicRetrieval r;
            r.id = rec.at("id").get<int>();
            r.tool = rec.at("tool").get<std::string>();
            r.query = rec.at("query").get<std::string>();
            r.polarity = parse_polarity(rec.at("polarity").get<std::string>());
            r.k = rec.at("k").get<int>();
            r.ranking = rec.at("results").get<std::vector<ImageId>>();
            r.results = CandidateSet(instance.gallery_size);
            for (ImageId id : r.ranking) r.results.insert(id);
            instance.pool.push_back(std::move(r));
        } else {
            throw Error(ErrorKind::Data, "unknown instance record type: " + kind);
        }
    }
    if (!have_header) throw Error(ErrorKind::Data, "instance file has no header record");
    instance.validate();
    return instance;
}

void save_instance(const Instance& instance, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << serialize_instance(instance);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_instance(buf.str());
}

std::vector<std::string> list_instance_files(const std::string& path) {
    std::vector<std::string> files;
    fs::path p(path);
    if (!fs::exists(p)) throw Error(ErrorKind::Io, "no such path: " + path);
    if (fs::is_directory(p)) {
        for (const auto& e : fs::directory_iterator(p)) {
            if (e.is_regular_file() && e.path().extension() == ".jsonl")
                files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(p.string());
    }
    return files;
}

std::vector<Instance> load_instances(const std::string& path) {
    std::vector<Instance> out;
    for (const auto& f : list_instance_files(path)) out.push_back(load_instance(f));
    return out;
}

}  // namespace setplan::core
