import json
import logging
from collections.abc import Sequence
from typing import Optional

from opentelemetry import trace
from opentelemetry.sdk.trace import ReadableSpan, TracerProvider
from opentelemetry.sdk.trace.export import SimpleSpanProcessor, SpanExporter, SpanExportResult

from settings import settings

TRACER_NAME = "chrestenson.pipeline"


class StageLoggingSpanExporter(SpanExporter):
    """
    Logs every finished pipeline stage span as one structured record.

    Span attributes carry the stage name and the signal lengths entering and
    leaving the stage, so a run can be reconstructed from the log alone.
    """

    def __init__(self, logger: Optional[logging.Logger] = None, debug: bool = False) -> None:
        """
        :param logger: Logger receiving the span records
        :param debug: Also keep the exported span dicts in ``self.records``
        """
        self.logger = logger or logging.getLogger(__name__)
        self.debug = debug
        self.records: list[dict] = []

    def export(self, spans: Sequence[ReadableSpan]) -> SpanExportResult:
        for span in spans:
            span_context = span.get_span_context()
            span_dict = json.loads(span.to_json())
            span_dict["trace_id"] = format(span_context.trace_id, "x")
            span_dict["span_id"] = format(span_context.span_id, "x")

            if self.debug:
                self.records.append(span_dict)

            self.logger.info(json.dumps(span_dict, sort_keys=True))
        return SpanExportResult.SUCCESS

    def shutdown(self) -> None:
        self.records.clear()


def stage_tracer(exporter: Optional[SpanExporter] = None) -> trace.Tracer:
    """Tracer for pipeline stages.

    With tracing disabled in settings and no explicit exporter the API's
    no-op tracer is returned.
    """
    if exporter is None and not settings.trace_stages:
        return trace.NoOpTracer()
    provider = TracerProvider()
    provider.add_span_processor(SimpleSpanProcessor(exporter or StageLoggingSpanExporter(debug=settings.debug_mode)))
    return provider.get_tracer(TRACER_NAME)
