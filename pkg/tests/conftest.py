import archpanel.baseline
import archpanel.nptest

# Package names that match pytest's collection patterns are plain API
# objects; mark them so the collector leaves them alone.
archpanel.nptest.TestOptions.__test__ = False
archpanel.baseline.test_each_series.__test__ = False
