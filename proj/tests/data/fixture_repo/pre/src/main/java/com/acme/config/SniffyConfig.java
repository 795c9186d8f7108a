package com.acme.config;

/**
 * Runtime configuration for HTML instrumentation.
 */
public class SniffyConfig {

    private Boolean injectHtml = Boolean.FALSE;

    /**
     * Enables or disables HTML injection for the current run.
     */
    public void setInjectHtml(boolean enabled) {
        if (enabled) {
            this.injectHtml = Boolean.TRUE;
        } else {
            this.injectHtml = Boolean.FALSE;
        }
    }

    /**
     * Reports whether HTML injection is currently enabled.
     */
    public boolean isInjectHtml() {
        return Boolean.TRUE.equals(this.injectHtml);
    }

    /**
     * Reloads configuration values from system properties.
     */
    public void loadSniffyConfiguration() {
        String value = System.getProperty("com.acme.injectHtml");
        this.injectHtml = Boolean.valueOf(value);
    }
}
