#include "dg/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dg/errors.hpp"

namespace dg {

namespace {

std::ofstream open_out(const std::string& path) {
    // binary keeps line endings at LF everywhere
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

void write_stamp(std::ofstream& out, const FileStamp& stamp) {
    out << "# config=" << stamp.config_hash << "\n";
    out << "# master_seed=" << stamp.master_seed << "\n";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw Error("malformed numeric field '" + s + "' in CSV");
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_timeseries_csv(const std::string& path, const EnsembleAccumulator& acc,
                          const FileStamp& stamp) {
    std::ofstream out = open_out(path);
    write_stamp(out, stamp);
    out << "# n_traj=" << acc.count << "\n";
    out << "t,n_mean,n_stderr,absalpha_mean,absalpha_stderr,alpha_re,alpha_im,"
           "alpha_stderr";
    for (std::size_t s = 0; s < acc.n_sites; ++s)
        out << ",n_" << s << ",a_re_" << s << ",a_im_" << s;
    out << "\n";
    for (std::size_t k = 0; k < acc.n_samples; ++k) {
        out << format_double(acc.times[k]) << ','
            << format_double(acc.nbar_stat[k].mean) << ','
            << format_double(acc.nbar_stat[k].stderr_of_mean(acc.count)) << ','
            << format_double(acc.absalpha_stat[k].mean) << ','
            << format_double(acc.absalpha_stat[k].stderr_of_mean(acc.count)) << ','
            << format_double(acc.alpha_stat[k].mean.real()) << ','
            << format_double(acc.alpha_stat[k].mean.imag()) << ','
            << format_double(acc.alpha_stat[k].stderr_of_mean(acc.count));
        const std::size_t base = k * acc.n_sites;
        for (std::size_t s = 0; s < acc.n_sites; ++s) {
            out << ',' << format_double(acc.n_stat[base + s].mean) << ','
                << format_double(acc.a_stat[base + s].mean.real()) << ','
                << format_double(acc.a_stat[base + s].mean.imag());
        }
        out << "\n";
    }
}

void write_corrmap_csv(const std::string& path, const CorrelationMap& map,
                       const FileStamp& stamp) {
    std::ofstream out = open_out(path);
    write_stamp(out, stamp);
    out << "# extent=" << map.extent << "\n";
    out << "# kind=" << (map.two_d ? "square" : "chain") << "\n";
    out << "# center=" << map.center << "\n";
    out << "# count=" << map.count << "\n";
    out << "site,di,dj,value,stderr\n";
    const long L = static_cast<long>(map.extent);
    const long cr = map.two_d ? static_cast<long>(map.center) / L
                              : static_cast<long>(map.center);
    const long cc = map.two_d ? static_cast<long>(map.center) % L : 0;
    for (std::size_t s = 0; s < map.values.size(); ++s) {
        const long r = map.two_d ? static_cast<long>(s) / L : static_cast<long>(s);
        const long c = map.two_d ? static_cast<long>(s) % L : 0;
        out << s << ',' << (r - cr) << ',' << (c - cc) << ','
            << format_double(map.values[s]) << ','
            << format_double(map.stderrs[s]) << "\n";
    }
}

void write_trajectories_csv(const std::string& path, const EnsembleAccumulator& acc,
                            const FileStamp& stamp) {
    std::ofstream out = open_out(path);
    write_stamp(out, stamp);
    out << "traj,t,alpha_re,alpha_im\n";
    for (int r = 0; r < acc.record_cap; ++r) {
        if (!acc.recorded_mask[static_cast<std::size_t>(r)]) continue;
        const cplx* row =
            acc.recorded_alpha.data() + static_cast<std::size_t>(r) * acc.n_samples;
        for (std::size_t k = 0; k < acc.n_samples; ++k)
            out << r << ',' << format_double(acc.times[k]) << ','
                << format_double(row[k].real()) << ','
                << format_double(row[k].imag()) << "\n";
    }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     const std::string& axis, const FileStamp& stamp) {
    std::ofstream out = open_out(path);
    write_stamp(out, stamp);
    out << axis
        << ",n_ss,n_ss_stderr,absalpha_ss,absalpha_ss_stderr,xi,xi_residual,"
           "powerlaw_residual,gamma_eff_n,gamma_eff_alpha,status\n";
    for (const auto& r : rows) {
        out << format_double(r.axis_value) << ',' << format_double(r.n_ss) << ','
            << format_double(r.n_ss_stderr) << ',' << format_double(r.absalpha_ss)
            << ',' << format_double(r.absalpha_ss_stderr) << ','
            << format_double(r.xi) << ',' << format_double(r.xi_residual) << ','
            << format_double(r.powerlaw_residual) << ','
            << format_double(r.gamma_eff_n) << ','
            << format_double(r.gamma_eff_alpha) << ',' << r.status << "\n";
    }
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

TimeseriesData read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        header = split_csv(line);
        break;
    }
    if (header.empty()) throw Error("no header row in " + path);
    auto col = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error("column '" + name + "' missing from " + path);
    };
    const std::size_t ct = col("t"), cn = col("n_mean"), cns = col("n_stderr"),
                      ca = col("absalpha_mean"), cas = col("absalpha_stderr");
    TimeseriesData data;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (f.size() < header.size()) throw Error("short row in " + path);
        data.times.push_back(parse_num(f[ct]));
        data.n_mean.push_back(parse_num(f[cn]));
        data.n_stderr.push_back(parse_num(f[cns]));
        data.absalpha_mean.push_back(parse_num(f[ca]));
        data.absalpha_stderr.push_back(parse_num(f[cas]));
    }
    return data;
}

CorrelationMap read_corrmap_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    CorrelationMap map;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string kv;
            ss >> kv;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "extent") map.extent = std::stoul(val);
            else if (key == "kind") map.two_d = (val == "square");
            else if (key == "center") map.center = std::stoul(val);
            else if (key == "count") map.count = std::stol(val);
            continue;
        }
        if (!have_header) {  // column header row
            have_header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 5) throw Error("malformed row in " + path);
        const std::size_t s = static_cast<std::size_t>(std::stoul(f[0]));
        if (map.values.size() <= s) {
            map.values.resize(s + 1, 0.0);
            map.stderrs.resize(s + 1, 0.0);
        }
        map.values[s] = parse_num(f[3]);
        map.stderrs[s] = parse_num(f[4]);
    }
    const std::size_t expect =
        map.two_d ? map.extent * map.extent : map.extent;
    if (map.extent == 0 || map.values.size() != expect)
        throw Error("correlation map in " + path + " is incomplete");
    return map;
}

}  // namespace dg
