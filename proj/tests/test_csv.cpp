#include "support.hpp"

#include <sstream>

using namespace alpods;
using testing_support::expect_error_kind;

TEST(Csv, ParsesRowsInFileOrder)
{
    const auto t = parse_csv("case_id,class,FS,SS\nc1,BM,1,2\nc1,BM,3,4\nc2,PB,5,6\nc2,PB,7,8\n");
    EXPECT_EQ(t.n_events(), 4u);
    EXPECT_EQ(t.n_markers(), 2u);
    EXPECT_EQ(t.n_cases(), 2u);
    EXPECT_EQ(t.value(3, 0), 7.0);
}

TEST(Csv, ColumnsMayAppearInAnyOrderAndCrlfIsAccepted)
{
    const auto t = parse_csv("SS,class,case_id,FS\r\n2,BM,c1,1\r\n");
    EXPECT_EQ(t.markers(), (std::vector<std::string>{"SS", "FS"}));
    EXPECT_EQ(t.value(0, 1), 1.0);
}

TEST(Csv, SchemaSelectsColumns)
{
    CsvSchema schema;
    schema.case_column = "patient";
    schema.class_column = "dx";
    schema.markers = {"b"};
    const auto t = parse_csv("patient,dx,a,b\np,X,1,2\n", schema);
    EXPECT_EQ(t.markers(), (std::vector<std::string>{"b"}));
    EXPECT_EQ(t.value(0, 0), 2.0);
}

TEST(Csv, SchemaFromJsonRejectsUnknownKeys)
{
    const auto s = CsvSchema::from_json({{"case_column", "p"}, {"markers", {"a"}}});
    EXPECT_EQ(s.case_column, "p");
    EXPECT_EQ(s.class_column, "class");
    expect_error_kind([] { CsvSchema::from_json({{"delimiter", ";"}}); }, ErrorKind::schema, "delimiter");
}

TEST(Csv, MissingColumnIsSchemaError)
{
    expect_error_kind([] { parse_csv("case_id,FS\nc,1\n"); }, ErrorKind::schema, "missing column 'class'");
}

TEST(Csv, NonNumericCellNamesTheLine)
{
    expect_error_kind([] { parse_csv("case_id,class,FS\nc,X,1\nc,X,abc\n"); }, ErrorKind::parse, "at line 3");
    expect_error_kind([] { parse_csv("case_id,class,FS\nc,X,\n"); }, ErrorKind::parse, "at line 2");
    expect_error_kind([] { parse_csv("case_id,class,FS\nc,X,inf\n"); }, ErrorKind::parse);
}

TEST(Csv, FieldCountMismatchIsParseError)
{
    expect_error_kind([] { parse_csv("case_id,class,FS\nc,X,1,2\n"); }, ErrorKind::parse, "at line 2");
}

TEST(Csv, InconsistentClassWithinCaseIsIntegrityError)
{
    expect_error_kind([] { parse_csv("case_id,class,FS\nA,BM,1\nA,PB,2\n"); }, ErrorKind::integrity);
}

TEST(Csv, EmptyAndHeaderOnlyInputs)
{
    expect_error_kind([] { parse_csv(""); }, ErrorKind::schema, "no header");
    expect_error_kind([] { parse_csv("case_id,class,FS\n"); }, ErrorKind::input, "no data rows");
}

TEST(Csv, MissingFileIsIoError)
{
    expect_error_kind([] { load_csv("/nonexistent/dir/x.csv"); }, ErrorKind::io);
}

TEST(Csv, RoundTripIsExact)
{
    Rng rng(3);
    std::vector<testing_support::Row> rows;
    for (int i = 0; i < 200; ++i) {
        rows.push_back({"case" + std::to_string(i % 7), i % 7 < 3 ? "A" : "B",
                        {rng.normal(0, 1e6), rng.normal(0, 1e-9), rng.uniform()}});
    }
    const auto t = testing_support::make_table({"m1", "m2", "m3"}, rows);
    std::ostringstream out;
    write_csv(out, t);
    EXPECT_TRUE(parse_csv(out.str()) == t);
}

TEST(Csv, TableOf700kEventsTenMarkersLoads)
{
    const auto table = generate_shifted_mixture(5, 700000);
    std::ostringstream out;
    write_csv(out, table);
    const auto back = parse_csv(out.str());
    EXPECT_EQ(back.n_events(), 700000u);
    EXPECT_EQ(back.markers(), synthetic_markers());
}
