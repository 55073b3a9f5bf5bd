from wahbakit.infrastructure.io.histograms import (
    CsvHistogramWriter,
    JsonHistogramWriter,
    histogram_to_dict,
    histogram_writer_for,
    write_text,
)
from wahbakit.infrastructure.io.measurements import (
    CsvMeasurementReader,
    JsonMeasurementReader,
    reader_for,
)
from wahbakit.infrastructure.io.reports import (
    CsvReportWriter,
    JsonReportWriter,
    report_to_dict,
    report_writer_for,
)
