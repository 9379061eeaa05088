#include "nsf/report.hpp"

#include <charconv>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nsf {

using ojson = nlohmann::ordered_json;

std::string format_number(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

void append_rows(std::ostringstream& out, const ROIReport& report, const std::string& subject)
{
    for (const auto& e : report.rois)
        out << csv_field(subject) << ',' << e.id << ',' << csv_field(e.name) << ',' << format_number(e.volume_mm3)
            << ',' << optional_number(e.dice) << '\n';
}

ojson report_json(const ROIReport& report, const std::string& subject)
{
    ojson j;
    j["subject"] = subject;
    auto rois = ojson::array();
    for (const auto& e : report.rois) {
        ojson r;
        r["id"] = e.id;
        r["name"] = e.name;
        r["volume_mm3"] = e.volume_mm3;
        r["dice"] = optional_json(e.dice);
        rois.push_back(std::move(r));
    }
    j["rois"] = std::move(rois);
    auto lateral = ojson::array();
    for (const auto& e : report.lateral) {
        ojson r;
        r["name"] = e.name;
        r["left"] = e.left;
        r["right"] = e.right;
        r["volume_mm3"] = e.volume_mm3;
        lateral.push_back(std::move(r));
    }
    j["lateral"] = std::move(lateral);
    j["wmh_volume_mm3"] = report.wmh_volume_mm3;
    return j;
}

constexpr const char* kRowHeader = "subject,id,name,volume_mm3,dice\n";

} // namespace

std::string roi_report_csv(const ROIReport& report, const std::string& subject)
{
    std::ostringstream out;
    out << kRowHeader;
    append_rows(out, report, subject);
    return out.str();
}

std::string roi_report_json(const ROIReport& report, const std::string& subject)
{
    return report_json(report, subject).dump(2) + "\n";
}

std::string dataset_cases_csv(const DatasetReport& report)
{
    std::ostringstream out;
    out << kRowHeader;
    for (const auto& c : report.cases)
        append_rows(out, c.predicted, c.id);
    return out.str();
}

std::string dataset_summary_csv(const DatasetReport& report, const LabelSchema& schema)
{
    std::ostringstream out;
    out << "id,name,mean_dice\n";
    for (std::size_t c = 0; c < report.mean_dice.size(); ++c)
        out << schema.id_at(c) << ',' << csv_field(schema.labels()[c].name) << ','
            << format_number(report.mean_dice[c]) << '\n';
    out << ",anatomy," << format_number(report.mean_anatomy_dice) << '\n';
    out << ",wmh," << format_number(report.mean_wmh_dice) << '\n';
    out << "\nstructure,pearson,spearman\n";
    for (const auto& c : report.correlations)
        out << csv_field(c.name) << ',' << optional_number(c.pearson) << ',' << optional_number(c.spearman) << '\n';
    return out.str();
}

std::string dataset_report_json(const DatasetReport& report, const LabelSchema& schema)
{
    ojson j;
    ojson summary;
    summary["cases"] = report.cases.size();
    summary["mean_anatomy_dice"] = report.mean_anatomy_dice;
    summary["mean_wmh_dice"] = report.mean_wmh_dice;
    summary["mean_wmh_volume_mm3"] = report.mean_wmh_volume_mm3;
    auto dice = ojson::array();
    for (std::size_t c = 0; c < report.mean_dice.size(); ++c) {
        ojson r;
        r["id"] = schema.id_at(c);
        r["name"] = schema.labels()[c].name;
        r["mean_dice"] = report.mean_dice[c];
        dice.push_back(std::move(r));
    }
    summary["dice"] = std::move(dice);
    auto corr = ojson::array();
    for (const auto& c : report.correlations) {
        ojson r;
        r["name"] = c.name;
        r["pearson"] = optional_json(c.pearson);
        r["spearman"] = optional_json(c.spearman);
        corr.push_back(std::move(r));
    }
    summary["correlations"] = std::move(corr);
    j["summary"] = std::move(summary);
    auto cases = ojson::array();
    for (const auto& c : report.cases) {
        ojson r = report_json(c.predicted, c.id);
        r["reference_volumes_mm3"] = ojson::array();
        for (const auto& e : c.reference.rois)
            r["reference_volumes_mm3"].push_back(e.volume_mm3);
        cases.push_back(std::move(r));
    }
    j["cases"] = std::move(cases);
    return j.dump(2) + "\n";
}

} // namespace nsf
