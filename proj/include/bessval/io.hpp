#pragma once

// CSV ingestion and emission for price histories, ensembles and result tables.

#include "bessval/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace bessval {

/// Reads `date,hour,price` rows into one PriceDay per date, sorted by date.
/// Every day must contain exactly hours 0..hours-1.
std::vector<PriceDay> load_price_csv(const std::string& path, int hours = kDefaultHours);
void write_price_csv(const std::string& path, const std::vector<PriceDay>& days);

/// Reads `date,member,hour,price` rows; members are numbered from 0.
std::map<std::string, ScenarioEnsemble> load_ensemble_csv(const std::string& path);
void write_ensemble_csv(const std::string& path, const std::vector<ScenarioEnsemble>& ensembles);

/// Fixed "%.12g" rendering used by every emitter so reruns are byte-identical.
std::string format_number(double v);

/// Validates an ISO yyyy-mm-dd date; throws InputError otherwise.
void check_iso_date(const std::string& iso_date);
/// Day of week for an ISO date, 0 = Monday .. 6 = Sunday.
int weekday_of(const std::string& iso_date);
/// ISO date shifted by a number of days.
std::string shift_date(const std::string& iso_date, int days);

/// Buffers a CSV table and writes it to disk on close().
class CsvWriter {
public:
    CsvWriter(std::string path, const std::vector<std::string>& header);

    CsvWriter& cell(const std::string& text);
    CsvWriter& cell(const char* text) { return cell(std::string(text)); }
    CsvWriter& cell(double value);
    CsvWriter& cell(int value);
    CsvWriter& cell(long value);
    void end_row();
    void close();

private:
    std::string path_;
    std::string buffer_;
    bool row_started_ = false;
};

/// Writes `text` to `path`, replacing any existing file.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bessval
