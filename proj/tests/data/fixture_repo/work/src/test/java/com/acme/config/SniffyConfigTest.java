package com.acme.config;

import org.junit.Test;
import static org.junit.Assert.assertFalse;

public class SniffyConfigTest {

    private final SniffyConfig sniffyConfiguration = new SniffyConfig();

    @Test
    public void testInjectHtml() {
        sniffyConfiguration.loadSniffyConfiguration();
        sniffyConfiguration.setInjectHtml(false);
        assertFalse(sniffyConfiguration.isInjectHtml());
    }
}
