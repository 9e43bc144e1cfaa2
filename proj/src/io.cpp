#include "bessval/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bessval {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string where(const std::string& path, long line) {
    return path + ":" + std::to_string(line) + ": ";
}

long parse_int(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw InputError(context + "expected an integer, got '" + text + "'");
    return v;
}

double parse_double(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v)) {
        throw InputError(context + "expected a finite number, got '" + text + "'");
    }
    return v;
}

std::chrono::sys_days to_days(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw InputError("invalid ISO date '" + iso + "' (expected yyyy-mm-dd)");
    }
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (iso[i] < '0' || iso[i] > '9') throw InputError("invalid ISO date '" + iso + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{std::stoi(iso.substr(0, 4))},
                                          std::chrono::month{static_cast<unsigned>(std::stoi(iso.substr(5, 2)))},
                                          std::chrono::day{static_cast<unsigned>(std::stoi(iso.substr(8, 2)))}};
    if (!ymd.ok()) throw InputError("invalid calendar date '" + iso + "'");
    return std::chrono::sys_days{ymd};
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return in;
}

void expect_header(const std::string& path, std::ifstream& in, const std::vector<std::string>& header) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + " is empty");
    if (split_line(line) != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw InputError(where(path, 1) + "expected header '" + want + "'");
    }
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void check_iso_date(const std::string& iso_date) { to_days(iso_date); }

int weekday_of(const std::string& iso_date) {
    const std::chrono::weekday wd{to_days(iso_date)};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

std::string shift_date(const std::string& iso_date, int days) {
    const std::chrono::year_month_day ymd{to_days(iso_date) + std::chrono::days{days}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::vector<PriceDay> load_price_csv(const std::string& path, int hours) {
    std::ifstream in = open_input(path);
    expect_header(path, in, {"date", "hour", "price"});
    std::map<std::string, std::vector<double>> prices;
    std::map<std::string, std::vector<char>> seen;
    std::string line;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_line(line);
        const std::string ctx = where(path, lineno);
        if (f.size() != 3) throw InputError(ctx + "expected 3 fields, got " + std::to_string(f.size()));
        try {
            check_iso_date(f[0]);
        } catch (const InputError& e) {
            throw InputError(ctx + e.what());
        }
        const long hour = parse_int(f[1], ctx);
        if (hour < 0 || hour >= hours) {
            throw InputError(ctx + "hour " + f[1] + " outside 0.." + std::to_string(hours - 1) +
                             "; 23/25-hour daylight-saving days must be pre-processed to " +
                             std::to_string(hours) + " hours (drop or duplicate the shifted hour)");
        }
        const double price = parse_double(f[2], ctx);
        auto& p = prices[f[0]];
        auto& s = seen[f[0]];
        if (p.empty()) {
            p.assign(static_cast<std::size_t>(hours), 0.0);
            s.assign(static_cast<std::size_t>(hours), 0);
        }
        if (s[static_cast<std::size_t>(hour)]) {
            throw InputError(ctx + "duplicate entry for " + f[0] + " hour " + f[1] +
                             " (daylight-saving days must be pre-processed)");
        }
        s[static_cast<std::size_t>(hour)] = 1;
        p[static_cast<std::size_t>(hour)] = price;
    }
    std::vector<PriceDay> days;
    for (auto& [date, p] : prices) {
        const auto& s = seen[date];
        for (int h = 0; h < hours; ++h) {
            if (!s[static_cast<std::size_t>(h)]) {
                throw InputError(path + ": " + date + " is missing hour " + std::to_string(h) +
                                 " (daylight-saving days must be pre-processed)");
            }
        }
        days.emplace_back(date, std::move(p));
    }
    if (days.empty()) throw InputError(path + " contains no price rows");
    return days;
}

void write_price_csv(const std::string& path, const std::vector<PriceDay>& days) {
    CsvWriter out(path, {"date", "hour", "price"});
    for (const auto& d : days) {
        for (int h = 0; h < d.hours(); ++h) out.cell(d.date()).cell(h).cell(d[h]).end_row();
    }
    out.close();
}

std::map<std::string, ScenarioEnsemble> load_ensemble_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    expect_header(path, in, {"date", "member", "hour", "price"});
    std::map<std::string, std::map<std::pair<long, long>, double>> cells;
    std::string line;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_line(line);
        const std::string ctx = where(path, lineno);
        if (f.size() != 4) throw InputError(ctx + "expected 4 fields, got " + std::to_string(f.size()));
        try {
            check_iso_date(f[0]);
        } catch (const InputError& e) {
            throw InputError(ctx + e.what());
        }
        const long member = parse_int(f[1], ctx);
        const long hour = parse_int(f[2], ctx);
        if (member < 0 || hour < 0) throw InputError(ctx + "member and hour must be non-negative");
        const double price = parse_double(f[3], ctx);
        if (!cells[f[0]].emplace(std::make_pair(member, hour), price).second) {
            throw InputError(ctx + "duplicate entry for " + f[0] + " member " + f[1] + " hour " + f[2]);
        }
    }
    std::map<std::string, ScenarioEnsemble> out;
    for (const auto& [date, c] : cells) {
        long members = 0;
        long hours = 0;
        for (const auto& [key, v] : c) {
            members = std::max(members, key.first + 1);
            hours = std::max(hours, key.second + 1);
        }
        if (static_cast<long>(c.size()) != members * hours) {
            throw InputError(path + ": ensemble for " + date + " is not a complete member x hour grid");
        }
        Eigen::MatrixXd paths(members, hours);
        for (const auto& [key, v] : c) paths(key.first, key.second) = v;
        out.emplace(date, ScenarioEnsemble(date, std::move(paths)));
    }
    if (out.empty()) throw InputError(path + " contains no ensemble rows");
    return out;
}

void write_ensemble_csv(const std::string& path, const std::vector<ScenarioEnsemble>& ensembles) {
    CsvWriter out(path, {"date", "member", "hour", "price"});
    for (const auto& e : ensembles) {
        for (int m = 0; m < e.members(); ++m) {
            for (int h = 0; h < e.hours(); ++h) {
                out.cell(e.date()).cell(m).cell(h).cell(e.paths()(m, h)).end_row();
            }
        }
    }
    out.close();
}

CsvWriter::CsvWriter(std::string path, const std::vector<std::string>& header) : path_(std::move(path)) {
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(const std::string& text) {
    if (row_started_) buffer_ += ',';
    buffer_ += text;
    row_started_ = true;
    return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_number(value)); }
CsvWriter& CsvWriter::cell(int value) { return cell(std::to_string(value)); }
CsvWriter& CsvWriter::cell(long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
    buffer_ += '\n';
    row_started_ = false;
}

void CsvWriter::close() { write_text_file(path_, buffer_); }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace bessval
